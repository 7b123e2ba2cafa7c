"""Write the five figure tables as CSV, and PNG plots when matplotlib is present.

    python scripts/make_figures.py out/
"""

import argparse
from pathlib import Path

from spinpair.figures import FIGURES, figure

LABELS = {
    "fig1": ("tau", "joint inversion probability"),
    "fig2": ("Gamma", "P(++ -> --)"),
    "fig3": ("theta", "P(++ -> --)"),
    "fig4": ("theta", "P(++ -> --)"),
    "fig5": ("Gamma", "<Jz(inf)>"),
}


def plot(name, table, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    x = table.rows[:, 0]
    for k, col in enumerate(table.header[1:], start=1):
        ax.plot(x, table.rows[:, k], label=col)
    ax.set_xlabel(LABELS[name][0])
    ax.set_ylabel(LABELS[name][1])
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out", type=Path)
    p.add_argument("--no-plots", action="store_true")
    args = p.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        import matplotlib  # noqa: F401
        plots = not args.no_plots
    except ImportError:
        plots = False
    for name in FIGURES:
        table = figure(name)
        table.write(args.out / f"{name}.csv")
        if plots:
            plot(name, table, args.out / f"{name}.png")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
