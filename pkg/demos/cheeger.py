"""Second eigenvalue of the terminal pencil against the exact s-t expansion.

For every s-t cut both sides hold exactly one terminal, so the expansion is
the min cut over a fixed volume and the Cheeger bounds can be checked
against an exact max-flow.
"""
from irlscut import cheeger_check, ingest
from irlscut.generate import grid2d, path, random_geometric


def main():
    graphs = {
        "triangle": ingest([("s", "a", 1.0), ("a", "t", 1.0), ("s", "t", 0.5)], "s", "t"),
        "unit path of 5": path(5, perturb=False),
        "grid 12x12 corners": grid2d(12, 12, terminals="corners", seed=0),
        "geometric 300": random_geometric(300, seed=3),
    }
    print(f"{'graph':>20} {'phi^2/2':>10} {'lambda2':>10} {'2 phi':>10} {'holds':>6}")
    for name, g in graphs.items():
        r = cheeger_check(g)
        print(f"{name:>20} {r.lower:>10.3e} {r.lambda2:>10.3e} {r.upper:>10.3e} {str(r.holds):>6}")


if __name__ == "__main__":
    main()
