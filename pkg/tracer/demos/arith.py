def area(width, height):
    scaled = width * height
    doubled = scaled * 2
    label = "area=" + str(doubled)
    return label


print(area(3, 4))
