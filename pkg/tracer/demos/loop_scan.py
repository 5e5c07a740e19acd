def first_match(search_strs, text):
    found = -1
    for i in range(len(search_strs)):
        s = search_strs[i]
        if text.startswith(s):
            found = i
    return found


hits = first_match(["http://", "https://"], "https://example.org")
print(hits)
