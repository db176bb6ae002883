#!/usr/bin/env python3
"""Convert a discrete BIF network into the HUGIN .net subset read by cptrank.

Usage: bif2net.py in.bif out.net [--parent-order NODE=P1,P2,...]...

Parents keep their BIF order unless overridden. The emitted data block lists
parent configurations with the last parent varying fastest and child states
innermost.
"""
import argparse
import itertools
import re
import sys


def parse_bif(text):
    text = re.sub(r"//[^\n]*", "", text)
    states = {}
    order = []
    for m in re.finditer(r"variable\s+(\S+)\s*\{\s*type\s+discrete\s*\[\s*(\d+)\s*\]\s*\{([^}]*)\}", text):
        name = m.group(1)
        labels = [s.strip() for s in m.group(3).split(",")]
        if len(labels) != int(m.group(2)):
            sys.exit(f"{name}: state count mismatch")
        states[name] = labels
        order.append(name)
    cpts = {}
    for m in re.finditer(r"probability\s*\(\s*([^|)]+?)\s*(?:\|\s*([^)]*))?\)\s*\{([^}]*)\}", text):
        child = m.group(1).strip()
        parents = [p.strip() for p in (m.group(2) or "").split(",") if p.strip()]
        body = m.group(3)
        nchild = len(states[child])
        rows = {}
        tm = re.search(r"table\s+([^;]*);", body)
        if tm:
            vals = [float(v) for v in tm.group(1).replace(",", " ").split()]
            if parents:
                sys.exit(f"{child}: 'table' with parents is not supported")
            rows[()] = vals
        for rm in re.finditer(r"\(([^)]*)\)\s*([^;]*);", body):
            key = tuple(s.strip() for s in rm.group(1).split(","))
            rows[key] = [float(v) for v in rm.group(2).replace(",", " ").split()]
        for k, v in rows.items():
            if len(v) != nchild:
                sys.exit(f"{child}: row {k} has {len(v)} values, expected {nchild}")
        cpts[child] = (parents, rows)
    return order, states, cpts


def fmt(x):
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def nested(states, parents, rows, prefix):
    depth = len(prefix)
    if depth == len(parents):
        return "(" + " ".join(fmt(v) for v in rows[tuple(prefix)]) + ")"
    parts = [nested(states, parents, rows, prefix + [s]) for s in states[parents[depth]]]
    return "(" + ("\n" + " " * (10 + depth)).join(parts) + ")"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("src")
    ap.add_argument("dst")
    ap.add_argument("--parent-order", action="append", default=[])
    args = ap.parse_args()
    order, states, cpts = parse_bif(open(args.src).read())
    overrides = {}
    for spec in args.parent_order:
        node, plist = spec.split("=", 1)
        overrides[node] = plist.split(",")
    out = ["net", "{", "}", ""]
    for name in order:
        labels = " ".join(f'"{s}"' for s in states[name])
        out += [f"node {name}", "{", f"  states = ( {labels} );", "}", ""]
    for name in order:
        parents, rows = cpts[name]
        if name in overrides:
            new = overrides[name]
            if sorted(new) != sorted(parents):
                sys.exit(f"{name}: override {new} is not a permutation of {parents}")
            perm = [parents.index(p) for p in new]
            rows = {tuple(k[i] for i in perm): v for k, v in rows.items()}
            parents = new
        head = f"potential ( {name} | {' '.join(parents)} )" if parents else f"potential ( {name} )"
        data = nested(states, parents, rows, [])
        out += [head, "{", f"  data = {data};", "}", ""]
    with open(args.dst, "w") as f:
        f.write("\n".join(out))


if __name__ == "__main__":
    main()
