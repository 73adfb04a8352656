"""Regenerate corpus.txt: 500 formulas from seeded random templates."""
import random

rng = random.Random(20240611)
ATOMS = ["a", "b", "c", "x", "y", "z", "n", "k", "1", "2", "10", r"\alpha", r"\beta", r"\pi", r"\theta", r"\infty", r"\lambda"]
BIN = ["+", "-", r"\cdot", r"\times", r"\pm", r"\cup", r"\cap", r"\oplus"]
REL = ["=", "<", r"\le", r"\ge", r"\ne", r"\approx", r"\equiv", r"\in", r"\subseteq", r"\to"]
FUN = [r"\sin", r"\cos", r"\log", r"\ln", r"\exp", r"\tan", "f", "g"]
BIG = [r"\sum", r"\prod", r"\int", r"\bigcup", r"\oint"]
ACC = [r"\hat", r"\bar", r"\vec", r"\tilde", r"\dot", r"\overline"]
STY = [r"\mathbf", r"\mathbb", r"\mathrm", r"\mathcal"]


def expr(depth):
    if depth == 0:
        return rng.choice(ATOMS)
    d = depth - 1
    kind = rng.randrange(16)
    if kind == 0:
        return f"{expr(d)} {rng.choice(BIN)} {expr(d)}"
    if kind == 1:
        return f"{expr(d)} {expr(d)}"
    if kind == 2:
        return rf"\frac{{{expr(d)}}}{{{expr(d)}}}"
    if kind == 3:
        return f"{{{expr(d)}}}^{{{expr(d)}}}"
    if kind == 4:
        return f"{rng.choice(ATOMS[:8])}_{{{expr(d)}}}"
    if kind == 5:
        return f"({expr(d)})"
    if kind == 6:
        return rf"\sqrt{{{expr(d)}}}"
    if kind == 7:
        return f"{rng.choice(FUN)} {expr(d)}"
    if kind == 8:
        return f"{rng.choice(FUN)}({expr(d)})"
    if kind == 9:
        v = rng.choice("ijk")
        return rf"{rng.choice(BIG)}_{{{v}=1}}^{{n}} {expr(d)}"
    if kind == 10:
        return f"|{expr(d)}|"
    if kind == 11:
        return f"{rng.choice(ACC)}{{{rng.choice(ATOMS[:6])}}}"
    if kind == 12:
        return f"{rng.choice(STY)}{{{rng.choice('ABCRNZ')}}}"
    if kind == 13:
        return rf"\binom{{{expr(d)}}}{{{expr(d)}}}"
    if kind == 14:
        return rf"\left[{expr(d)}\right]"
    return f"-{expr(d)}"


def formula():
    e = expr(rng.randrange(1, 4))
    if rng.random() < 0.4:
        e = f"{e} {rng.choice(REL)} {expr(rng.randrange(0, 3))}"
    if rng.random() < 0.1:
        e = f"{e} {rng.choice(REL)} {expr(1)}"
    return e


seen = set()
out = []
while len(out) < 500:
    f = formula()
    if f not in seen:
        seen.add(f)
        out.append(f)
with open("corpus.txt", "w") as fh:
    fh.write("\n".join(out) + "\n")
