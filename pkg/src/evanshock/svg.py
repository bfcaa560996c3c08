"""Static SVG figures with deterministic bytes."""
from __future__ import annotations

import io
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("g_curve", "boundary_map", "contour_pair", "snapshot_panel")

_RC = {
    "svg.hashsalt": "evanshock",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9,
}


class EmptyDatasetError(ValueError):
    pass


def _g_curve(fig, d):
    ax = fig.add_subplot(111)
    ax.plot(d["v"], d["g"], lw=1.2)
    ax.axhline(0.0, color="0.5", lw=0.6)
    ax.set_xscale("log")
    ax.set_xlabel("v")
    ax.set_ylabel("g(v)")
    ax.set_title(f"gamma = {d['gamma']:.4g}, v+ = {d['v_plus']:.3g}")


def _boundary_map(fig, d):
    ax = fig.add_subplot(111)
    for key, label in (("vplus_sharp", "sharp condition"), ("vplus_mn", "small-amplitude condition")):
        if key in d:
            ax.plot(d["gamma"], d[key], lw=1.4, label=label)
    for m, vp in sorted(d.get("iso_mach", {}).items()):
        ax.plot(d["gamma"], vp, ":", color="0.4", lw=0.9)
        ax.annotate(f"M = {m:g}", (d["gamma"][-1], vp[-1]), fontsize=7, color="0.3")
    ax.set_yscale("log")
    ax.set_xlabel("gamma")
    ax.set_ylabel("v+")
    ax.legend(loc="lower right")


def _contour_pair(fig, d):
    lam = np.asarray(d["lambda"])
    D = np.asarray(d["D"])
    ax1 = fig.add_subplot(121)
    ax1.plot(lam.real, lam.imag, ".-", ms=2, lw=0.8)
    ax1.set_aspect("equal")
    ax1.set_xlabel("Re lambda")
    ax1.set_ylabel("Im lambda")
    ax1.set_title("(a) contour")
    ax2 = fig.add_subplot(122)
    ax2.plot(D.real, D.imag, ".-", ms=2, lw=0.8)
    ax2.plot([0], [0], "k+")
    ax2.set_xlabel("Re D")
    ax2.set_ylabel("Im D")
    ax2.set_title(f"(b) image, winding = {d.get('winding', '?')}")


def _snapshot_panel(fig, d):
    snaps = d["snapshots"]
    for k, (t, x, v, u) in enumerate(snaps[:4]):
        ax = fig.add_subplot(2, 2, k + 1)
        ax.plot(x, v, lw=1.0, label="v")
        ax.plot(x, u, lw=1.0, label="u")
        ax.set_title(f"t = {t:.4g}")
        ax.set_xlabel("x")
        if k == 0:
            ax.legend()


_DRAW = {
    "g_curve": _g_curve,
    "boundary_map": _boundary_map,
    "contour_pair": _contour_pair,
    "snapshot_panel": _snapshot_panel,
}


def _is_empty(dataset, kind):
    keys = {"g_curve": "v", "boundary_map": "gamma", "contour_pair": "lambda",
            "snapshot_panel": "snapshots"}
    val = dataset.get(keys[kind]) if dataset else None
    return val is None or len(val) == 0


def emit_svg(dataset: dict, kind: str, path=None, config: dict | None = None) -> str:
    """Render ``dataset`` as an SVG of the given ``kind``; returns the text.

    The effective ``config`` is embedded as an XML comment.  Output bytes
    depend only on the inputs.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if _is_empty(dataset, kind):
        raise EmptyDatasetError(f"empty dataset for {kind}")
    size = (9, 4) if kind == "contour_pair" else (8, 6) if kind == "snapshot_panel" else (5, 4)
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=size)
        try:
            _DRAW[kind](fig, dataset)
            fig.tight_layout()
            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
        finally:
            plt.close(fig)
    text = buf.getvalue()
    comment = json.dumps(config or {}, sort_keys=True).replace("--", "- -")
    head, sep, rest = text.partition("<svg")
    text = f"{head}<!-- evanshock {kind}; config: {comment} -->\n{sep}{rest}"
    if path is not None:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text
