#!/usr/bin/env python3
"""Independent big-integer reference for the permutation, sponge and Merkle root.

Usage: poseidon_oracle.py <constants.json> <output.json>

Plain Python integers reduced with `% P` after every step; shares no code
with the Rust crate. The output file freezes test vectors consumed by the
Rust test suites.
"""
import json
import random
import sys

P = 2**64 - 2**32 + 1


def load(path):
    doc = json.load(open(path))
    c = [[int(x) for x in blk] for blk in doc["C"]]
    m = [[int(x) for x in row] for row in doc["M"]]
    s = [([int(x) for x in b["v0"]], [int(x) for x in b["v1"]]) for b in doc["S"]]
    return doc["half_full_rounds"], doc["partial_rounds"], c, m, s


def permute(state, consts):
    half, partial, c, m, s = consts
    state = list(state)
    ci = 0

    def add_c():
        nonlocal state, ci
        state = [(x + k) % P for x, k in zip(state, c[ci])]
        ci += 1

    def sbox_all():
        nonlocal state
        state = [pow(x, 7, P) for x in state]

    def mds():
        nonlocal state
        state = [sum(state[j] * m[j][col] for j in range(12)) % P for col in range(12)]

    add_c()
    for _ in range(half):
        sbox_all()
        mds()
        add_c()
    for r in range(partial):
        state[0] = pow(state[0], 7, P)
        v0, v1 = s[r]
        tmp = sum(a * b for a, b in zip(state, v0)) % P
        w = [state[0] * b % P for b in v1]
        state = [(a + b) % P for a, b in zip(state, w)]
        state[0] = tmp
    for _ in range(half):
        sbox_all()
        mds()
        add_c()
    assert ci == len(c)
    return state


def hash_block(inp, cap, consts):
    return permute(list(inp) + list(cap), consts)[:4]


def linear_hash(inp, consts):
    inp = list(inp)
    if not inp:
        inp = [0] * 8
    while len(inp) % 8:
        inp.append(0)
    cap = [0] * 4
    out = None
    for i in range(0, len(inp), 8):
        st = permute(inp[i:i + 8] + cap, consts)
        cap = st[8:12]
        out = st[:4]
    return out


def merkle_root(leaves, consts):
    level = [hash_block(leaf, [0] * 4, consts) for leaf in leaves]
    while len(level) > 1:
        level = [hash_block(level[i] + level[i + 1], [0] * 4, consts) for i in range(0, len(level), 2)]
    return level[0]


def main():
    consts = load(sys.argv[1])
    rng = random.Random(0x5EED_0F_0A11_D1)

    def elem():
        while True:
            x = rng.getrandbits(64)
            if x < P:
                return x

    def vec(n):
        return [elem() for _ in range(n)]

    perms = [{"input": [0] * 12, "output": permute([0] * 12, consts)}]
    for _ in range(100):
        st = vec(12)
        perms.append({"input": st, "output": permute(st, consts)})

    blocks = [{"input": [0] * 8, "capacity": [0] * 4, "digest": hash_block([0] * 8, [0] * 4, consts)}]
    for _ in range(100):
        inp, cap = vec(8), vec(4)
        blocks.append({"input": inp, "capacity": cap, "digest": hash_block(inp, cap, consts)})

    linear = [{"input": [], "digest": linear_hash([], consts)}]
    for n in (3, 8, 11, 16, 24):
        inp = vec(n)
        linear.append({"input": inp, "digest": linear_hash(inp, consts)})

    trees = []
    for n in (1, 2, 4, 8):
        leaves = [vec(8) for _ in range(n)]
        trees.append({"leaves": leaves, "root": merkle_root(leaves, consts)})

    def s(xs):
        return [str(x) for x in xs]

    doc = {
        "permute": [{"input": s(v["input"]), "output": s(v["output"])} for v in perms],
        "hash_block": [{"input": s(v["input"]), "capacity": s(v["capacity"]), "digest": s(v["digest"])} for v in blocks],
        "linear_hash": [{"input": s(v["input"]), "digest": s(v["digest"])} for v in linear],
        "merkle": [{"leaves": [s(l) for l in v["leaves"]], "root": s(v["root"])} for v in trees],
    }
    with open(sys.argv[2], "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
