"""Regenerate tests/data/label_grid.csv from the circumplex rules.

Independent of the C++ implementation: uses math.atan2 in degrees for the
octant and plain comparisons for the >= 5 binarization.
"""
import math
import sys

NAMES = ["pleased", "excited", "annoying", "nervous", "sad", "sleepy", "calm", "relaxed"]
QUAD = {("high", "high"): "HVHA", ("low", "high"): "LVHA", ("low", "low"): "LVLA", ("high", "low"): "HVLA"}


def main(path):
    rows = ["valence,arousal,valence_level,arousal_level,quadrant4,octant8"]
    for i in range(17):
        for j in range(17):
            v, a = 1 + 0.5 * i, 1 + 0.5 * j
            if v == 5 and a == 5:
                k = 0
            else:
                theta = math.degrees(math.atan2(a - 5, v - 5)) % 360.0
                k = int(theta // 45)
            vl = "high" if v >= 5 else "low"
            al = "high" if a >= 5 else "low"
            rows.append(f"{v:g},{a:g},{vl},{al},{QUAD[(vl, al)]},{NAMES[k]}")
    with open(path, "w") as f:
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/label_grid.csv")
