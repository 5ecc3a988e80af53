#!/usr/bin/env python3
"""Build the bundled Poseidon constants file from the plonky2 Goldilocks tables.

Usage: gen_constants.py <plonky2-src/hash dir> <output.json>

Reads ALL_ROUND_CONSTANTS from poseidon.rs and the MDS / fast partial round
tables from poseidon_goldilocks.rs (plonky2 0.2.x, MIT OR Apache-2.0), then
lays them out in the 9 round-constant blocks, dense 12x12 MDS matrix and 22
sparse partial blocks consumed by the permutation in this repository:

  C[0..4]  = full-round constants of rounds 0..3
  C[4]     = FAST_PARTIAL_FIRST_ROUND_CONSTANT
  C[5..8]  = full-round constants of rounds 27..29
  C[8]     = zero block (nothing follows the last MDS layer)
  M[j][c]  = circ[(j - c) mod 12] + diag[c] * (j == c)   (state-row times M)
  S[r].v0  = [circ[0] + diag[0]] ++ W_HATS[r]
  S[r].v1  = [0] ++ VS[r]
"""
import json
import re
import sys

P = 2**64 - 2**32 + 1


def numbers(text):
    return [int(tok, 0) for tok in re.findall(r"0x[0-9a-fA-F]+|\b\d+\b", text)]


def block(src, name):
    m = re.search(re.escape(name) + r"\s*:[^=]*=\s*\[(.*?)\];", src, re.S)
    if not m:
        raise SystemExit(f"table {name} not found")
    body = re.sub(r"//[^\n]*", "", m.group(1))
    return numbers(body)


def main():
    hash_dir, out = sys.argv[1], sys.argv[2]
    generic = open(f"{hash_dir}/poseidon.rs").read()
    gold = open(f"{hash_dir}/poseidon_goldilocks.rs").read()

    rc = block(generic, "ALL_ROUND_CONSTANTS")
    assert len(rc) == 360, len(rc)
    circ = block(gold, "MDS_MATRIX_CIRC")
    diag = block(gold, "MDS_MATRIX_DIAG")
    first = block(gold, "FAST_PARTIAL_FIRST_ROUND_CONSTANT")
    vs = block(gold, "FAST_PARTIAL_ROUND_VS")
    w_hats = block(gold, "FAST_PARTIAL_ROUND_W_HATS")
    assert len(circ) == len(diag) == len(first) == 12
    assert len(vs) == len(w_hats) == 22 * 11

    def rc_round(r):
        return rc[12 * r: 12 * r + 12]

    c_blocks = [rc_round(r) for r in range(4)] + [first] + [rc_round(r) for r in (27, 28, 29)] + [[0] * 12]
    mds = [[circ[(j - c) % 12] + (diag[c] if j == c else 0) for c in range(12)] for j in range(12)]
    s_blocks = []
    for r in range(22):
        v0 = [circ[0] + diag[0]] + w_hats[11 * r: 11 * r + 11]
        v1 = [0] + vs[11 * r: 11 * r + 11]
        s_blocks.append({"v0": v0, "v1": v1})

    for x in [v for b in c_blocks for v in b] + [v for row in mds for v in row] + \
             [v for s in s_blocks for v in s["v0"] + s["v1"]]:
        assert 0 <= x < P, x

    def dec(xs):
        return [str(x) for x in xs]

    doc = {
        "half_full_rounds": 4,
        "partial_rounds": 22,
        "C": [dec(b) for b in c_blocks],
        "M": [dec(row) for row in mds],
        "S": [{"v0": dec(s["v0"]), "v1": dec(s["v1"])} for s in s_blocks],
    }
    with open(out, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
