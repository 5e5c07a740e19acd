"""CPU-bound workload for measuring tracer slowdown.

Each traced line does real work over a multi-kilobyte paragraph (regex
scan, set building, sorting, joining), the kind of per-line cost ordinary
text-processing code has.  Prints "<elapsed-seconds> <checksum>"; the
elapsed time covers only the workload loop, so interpreter and tracer
startup do not skew the ratio.
"""

import re
import sys
import time

WORD = re.compile(r"[a-z']+")


def digest(text):
    lowered = text.lower()
    words = WORD.findall(lowered)
    unique = sorted(set(words))
    joined = ",".join(unique)
    return len(joined) + len(words)


def main(repeat):
    paragraph = ("The quick brown fox jumps over the lazy dog; "
                 "pack my box with five dozen liquor jugs. ") * 40
    total = 0
    started = time.perf_counter()
    for _ in range(repeat):
        total += digest(paragraph)
    elapsed = time.perf_counter() - started
    print(f"{elapsed:.6f} {total}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 400)
