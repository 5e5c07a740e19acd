class Counter:
    def __init__(self, start):
        self.value = start

    def __str__(self):
        return "Counter(%d)" % self.value

    def bump(self, amount):
        self.value = self.value + amount
        return self.value


c = Counter(5)
c.bump(2)
print(c)
