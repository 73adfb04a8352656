"""Regenerate smp_table.tsv from the Unicode character database.

Each row: style, base character, expected codepoint. Rows come from the
character names in the Mathematical Alphanumeric Symbols block; reserved
slots are resolved to their Letterlike Symbols counterparts by name.
"""
import string
import unicodedata

STYLES = {
    "bold": ("BOLD", None),
    "italic": ("ITALIC", None),
    "bold-italic": ("BOLD ITALIC", None),
    "script": ("SCRIPT", "SCRIPT"),
    "fraktur": ("FRAKTUR", "BLACK-LETTER"),
    "double-struck": ("DOUBLE-STRUCK", "DOUBLE-STRUCK"),
    "sans": ("SANS-SERIF", None),
    "monospace": ("MONOSPACE", None),
}
DIGIT_NAMES = "ZERO ONE TWO THREE FOUR FIVE SIX SEVEN EIGHT NINE".split()
GREEK_STYLES = ("bold", "italic", "bold-italic")


def lookup(name):
    try:
        return unicodedata.lookup(name)
    except KeyError:
        return None


def latin(style, letter):
    math_name, letterlike = STYLES[style]
    case = "CAPITAL" if letter.isupper() else "SMALL"
    ch = lookup(f"MATHEMATICAL {math_name} {case} {letter.upper()}")
    if ch is None and letterlike:
        ch = lookup(f"{letterlike} {case} {letter.upper()}")
    if ch is None and style == "italic" and letter == "h":
        ch = lookup("PLANCK CONSTANT")
    return ch


def main():
    rows = []
    for style in STYLES:
        for letter in string.ascii_uppercase + string.ascii_lowercase:
            ch = latin(style, letter)
            if ch is None:
                raise SystemExit(f"no codepoint for {style} {letter}")
            rows.append((style, letter, ch))
        for d, name in enumerate(DIGIT_NAMES):
            ch = lookup(f"MATHEMATICAL {STYLES[style][0]} DIGIT {name}")
            if ch is not None:
                rows.append((style, str(d), ch))
    for style in GREEK_STYLES:
        for cp in list(range(0x391, 0x3AA)) + list(range(0x3B1, 0x3CA)):
            base = chr(cp)
            try:
                gname = unicodedata.name(base)
            except ValueError:
                continue
            case = "CAPITAL" if "CAPITAL" in gname else "SMALL"
            letter = gname.split(" LETTER ", 1)[1]
            ch = lookup(f"MATHEMATICAL {STYLES[style][0]} {case} {letter}")
            if ch is not None:
                rows.append((style, base, ch))
    print(f"# generated by gen_smp_table.py (unicodedata {unicodedata.unidata_version})")
    print("# style\tbase\tcodepoint")
    for style, base, ch in rows:
        print(f"{style}\t{base}\tU+{ord(ch):04X}")


if __name__ == "__main__":
    main()
