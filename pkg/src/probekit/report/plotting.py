"""Figure helpers. Uses the non-interactive Agg backend."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}

GOLDEN = (5 ** 0.5 - 1) / 2


def figure(width=5.0, height=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height or width * GOLDEN))
    return fig, ax


def save(fig, path):
    with plt.rc_context(STYLE):
        fig.savefig(path)
    plt.close(fig)
    return path


def campaign_figure(summary, path):
    fig, ax = figure()
    names = list(summary["per_profile"])
    done = [summary["per_profile"][n]["completed"] for n in names]
    lost = [summary["per_profile"][n]["events"] - summary["per_profile"][n]["completed"] for n in names]
    ax.bar(names, done, label="completed", color="tab:green")
    ax.bar(names, lost, bottom=done, label="discarded", color="tab:gray")
    ax.set_ylabel("deployments")
    ax.set_title(f"success rate {summary['success_rate']:.1%}")
    if names:
        ax.legend()
    return save(fig, path)


def node_busy_figure(summary, path):
    fig, ax = figure()
    busy = summary["per_node_busy_s"]
    ax.bar(list(busy), list(busy.values()), color="tab:blue")
    ax.set_ylabel("cumulative busy time (s)")
    return save(fig, path)


def timeline_figure(series, ylabel, path, limit=None):
    """``series`` maps a label to (times, values)."""
    fig, ax = figure()
    for label, (ts, vs) in series.items():
        ax.plot(ts, vs, label=label, lw=1.2)
    if limit is not None:
        ax.axhline(limit, color="k", ls="--", lw=0.8, label="budget")
    ax.set_xlabel("time (s)")
    ax.set_ylabel(ylabel)
    if series:
        ax.legend()
    return save(fig, path)


def counts_figure(counts, path):
    fig, ax = figure()
    ax.bar(list(counts), list(counts.values()), color="tab:orange")
    ax.set_yscale("log" if counts and max(counts.values()) > 50 * max(1, min(counts.values())) else "linear")
    ax.set_ylabel("instances")
    return save(fig, path)


def trace_figure(rows, path):
    fig, ax = figure()
    ok = [r for r in rows if r["rtt_us"] not in (None, "")]
    plain = [r for r in ok if not r["labels"]]
    mpls = [r for r in ok if r["labels"]]
    ax.plot([r["ttl_sent"] for r in plain], [int(r["rtt_us"]) / 1000 for r in plain], "o", label="IP hop")
    ax.plot([r["ttl_sent"] for r in mpls], [int(r["rtt_us"]) / 1000 for r in mpls], "s", label="MPLS labels")
    ax.set_xlabel("TTL")
    ax.set_ylabel("RTT (ms)")
    if ok:
        ax.legend()
    return save(fig, path)
