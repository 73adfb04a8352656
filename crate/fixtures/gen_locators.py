"""Regenerate locators.jsonl. A marker character sits immediately before the
faulty token; its line and column are the expected locator."""
import json

MARK = "¦"
CASES = [
    ("math", False, r"a+¦\undefinedcmd b", "unknown-control-sequence"),
    ("math", False, "x\n  + ¦\\nope", "unknown-control-sequence"),
    ("math", False, "a\n\n\n   ¦\\foo + b", "unknown-control-sequence"),
    ("math", False, r"\frac{a}{¦\bogus}", "unknown-control-sequence"),
    ("math", False, r"x^{2} + y_{¦\idx}", "unknown-control-sequence"),
    ("math", False, r"\sqrt{¦\zz + 1}", "unknown-control-sequence"),
    ("math", False, "\\newcommand{\\half}{\\frac{1}{2}\\oops}\n\nx = ¦\\half", "unknown-control-sequence"),
    ("math", False, "\\def\\sq#1{#1^2\\bad}\ny + ¦\\sq{3}", "unknown-control-sequence"),
    ("math", False, "\\newcommand{\\outer}{\\inner}\n\\newcommand{\\inner}{\\missing}\n  a ¦\\outer", "unknown-control-sequence"),
    ("math", False, "\\newcommand{\\pair}[2]{(#1,#2)}\n\\pair{a}{¦\\what}", "unknown-control-sequence"),
    ("math", True, "¦{a", "delimiter-imbalance"),
    ("math", True, "x + ¦{a + b", "delimiter-imbalance"),
    ("math", True, "a\n+ ¦(b", "delimiter-imbalance"),
    ("math", True, "\\frac{1}{2} ¦[x", "delimiter-imbalance"),
    ("math", True, "a + b¦)", "delimiter-imbalance"),
    ("math", True, "x = ¦\\left( y", "delimiter-imbalance"),
    ("math", False, "x+¦(a", "delimiter-imbalance"),
    ("math", False, "\n\n  ¦{y", "delimiter-imbalance"),
    ("math", False, "a + b¦]", "delimiter-imbalance"),
    ("math", False, "\\newcommand{\\open}{(}\nz = ¦\\open w", "delimiter-imbalance"),
    ("math", True, "\\def\\loop{\\loop}\nx = ¦\\loop", "expansion-depth-exceeded"),
    ("math", True, "\\newcommand{\\a}{\\b}\\newcommand{\\b}{\\a} ¦\\a", "expansion-depth-exceeded"),
    ("fragment", False, "Text then ¦$x + y", "delimiter-imbalance"),
    ("fragment", False, "Line one.\n\nMore ¦\\(a", "delimiter-imbalance"),
    ("fragment", False, "See $a$ and ¦\\undefinedthing here.", "unknown-control-sequence"),
    ("fragment", False, "A\nB $x + ¦\\qq$", "unknown-control-sequence"),
    ("fragment", False, "Load ¦\\input{missing} now", "missing-input"),
    ("fragment", True, "Strict ¦$x", "delimiter-imbalance"),
    ("math", False, "\\newcommand{\\r}{\\mathbb{R}\\zap}\n\n\nf \\colon ¦\\r", "unknown-control-sequence"),
    ("math", False, "\t\t¦\\tabbed", "unknown-control-sequence"),
]


def position(marked):
    idx = marked.index(MARK)
    before = marked[:idx]
    line = before.count("\n") + 1
    column = idx - (before.rfind("\n") + 1) + 1
    return line, column


with open("locators.jsonl", "w") as fh:
    for profile, strict, marked, category in CASES:
        assert marked.count(MARK) == 1, marked
        line, column = position(marked)
        row = {"profile": profile, "strict": strict, "source": marked.replace(MARK, ""), "line": line, "column": column, "category": category}
        fh.write(json.dumps(row, ensure_ascii=False) + "\n")
print(len(CASES))
