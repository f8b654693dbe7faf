"""Regenerate the two synthetic tables used by the trend experiments.

lossy_channel.csv
    Every link has a success probability between 0.3 and 0.8.  Each posture
    uses the same 21 evenly spaced probabilities, shuffled over the pairs
    with a posture-seeded RNG.

two_path_channel.csv
    Head (2) and ankle (4) cannot reach the navel sink (0) directly.  Each
    has two disjoint two-hop routes: through the chest (1), whose links are
    mediocre (ETX about 2 per hop), and through the upper arm (3), whose
    links are poor (ETX about 20 per hop).  Thigh (5) and wrist (6) sit on
    the sink with good links.  The chest links vary a little with posture.

    python scripts/make_test_tables.py src/wbancast/data
"""
import random
import sys
from pathlib import Path
from statistics import NormalDist

BUDGET_DB = 40.0
SD_DB = 5.0
NODES = range(7)
PAIRS = [(a, b) for a in NODES for b in NODES if a < b]


def mean_for(p, sd=SD_DB):
    """Mean attenuation giving success probability ``p`` under the 40 dB budget."""
    if p <= 0:
        return 90.0
    return BUDGET_DB - sd * NormalDist().inv_cdf(p)


def lossy_rows():
    grid = [0.3 + 0.5 * (k + 0.5) / len(PAIRS) for k in range(len(PAIRS))]
    for posture in range(1, 8):
        ps = grid[:]
        random.Random(posture).shuffle(ps)
        for (a, b), p in zip(PAIRS, ps):
            yield posture, a, b, mean_for(p)


def two_path_rows():
    far = {2, 4}
    for posture in range(1, 8):
        fast = 0.50 + 0.02 * (posture - 1)
        for a, b in PAIRS:
            pair = {a, b}
            if pair == {0, 1} or (1 in pair and pair & far):
                p = fast
            elif pair == {0, 3}:
                p = 0.07
            elif 3 in pair and pair & far:
                p = 0.05
            elif pair in ({0, 5}, {0, 6}):
                p = 0.95
            else:
                p = 0.0
            yield posture, a, b, mean_for(p)


def write(path, rows):
    with open(path, "w") as out:
        out.write("posture,node_a,node_b,mean_db,stddev_db\n")
        for posture, a, b, mean in rows:
            out.write(f"{posture},{a},{b},{mean:.6f},{SD_DB}\n")


def main(outdir):
    outdir = Path(outdir)
    write(outdir / "lossy_channel.csv", lossy_rows())
    write(outdir / "two_path_channel.csv", two_path_rows())


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
