"""Token kinds the interpreter's tokenizer produces for a source file.

Comments, non-logical newlines and the encoding marker are dropped. Prints
one line of space-separated kinds, then "compile: ok" or the exception name.
Usage: python3 tokenize_oracle.py FILE
"""
import sys
import tokenize

path = sys.argv[1]
with open(path, "rb") as fh:
    kinds = [tokenize.tok_name[t.type] for t in tokenize.tokenize(fh.readline)
             if t.type not in (tokenize.COMMENT, tokenize.NL, tokenize.ENCODING)]
print(" ".join(kinds))
try:
    compile(open(path, "rb").read(), path, "exec")
    print("compile: ok")
except SyntaxError as exc:
    print("compile: " + type(exc).__name__)
