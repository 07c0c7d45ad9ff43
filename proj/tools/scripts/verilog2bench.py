#!/usr/bin/env python3
"""Convert gate-primitive structural Verilog (ISCAS-85 style) to .bench.

Usage: verilog2bench.py in.v > out.bench
Only the primitive gates and/or/nand/nor/xor/xnor/not/buf are supported.
"""
import re
import sys


def main(path):
    text = open(path).read()
    text = re.sub(r"//.*", "", text)
    stmts = [s.strip() for s in text.split(";")]
    inputs, outputs, gates = [], [], []
    for s in stmts:
        s = " ".join(s.split())
        m = re.match(r"^(input|output)\s+(.*)$", s)
        if m:
            names = [n.strip() for n in m.group(2).split(",") if n.strip()]
            (inputs if m.group(1) == "input" else outputs).extend(names)
            continue
        m = re.match(r"^(and|or|nand|nor|xor|xnor|not|buf)\s+\S+\s*\((.*)\)$", s)
        if m:
            pins = [p.strip() for p in m.group(2).split(",")]
            gates.append((m.group(1).upper(), pins[0], pins[1:]))
    name = re.search(r"module\s+(\w+)", text).group(1)
    print(f"# {name}")
    print(f"# {len(inputs)} inputs, {len(outputs)} outputs, {len(gates)} gates")
    for n in inputs:
        print(f"INPUT({n})")
    for n in outputs:
        print(f"OUTPUT({n})")
    for kind, out, ins in gates:
        print(f"{out} = {kind}({', '.join(ins)})")


if __name__ == "__main__":
    main(sys.argv[1])
