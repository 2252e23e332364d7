"""Writes the stand-in recall-vs-area curve.

Logistic in log-area through recall 0.05 at 12^2, 0.5 at 32^2 and 0.95 at
96^2 px^2, with separate widths below and above the midpoint. Replace the
output with a measured curve when one is available.
"""
import json
import math
import sys

MID = math.log(32.0 ** 2)
LOGIT_95 = math.log(0.95 / 0.05)
WIDTH_LO = (MID - math.log(12.0 ** 2)) / LOGIT_95
WIDTH_HI = (math.log(96.0 ** 2) - MID) / LOGIT_95


def recall(area):
    x = math.log(area) - MID
    w = WIDTH_LO if x < 0 else WIDTH_HI
    return 1.0 / (1.0 + math.exp(-x / w))


def main(path):
    points = []
    for i in range(41):
        area = 4.0 ** 2 * (2.0 ** (i * 0.375))
        points.append([round(area, 3), round(recall(area), 6)])
    with open(path, "w") as f:
        f.write("[\n")
        f.write(",\n".join("  [%s, %s]" % (a, r) for a, r in points))
        f.write("\n]\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/recall_curve_standin.json")
