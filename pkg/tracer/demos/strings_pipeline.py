MARKER = "XyZzY123"


def read_input():
    raw = "  " + MARKER + " entry  "
    return raw


def transform(raw):
    cleaned = raw.strip()
    upper = cleaned.upper()
    return upper


def render(upper):
    return "[" + upper + "]"


print(render(transform(read_input())))
