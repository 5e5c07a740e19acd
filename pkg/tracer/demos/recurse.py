def countdown(n):
    if n == 0:
        return "liftoff"
    return countdown(n - 1)


def must_parse(text):
    return int(text)


print(countdown(3))
try:
    must_parse("nope")
except ValueError:
    print("caught")
