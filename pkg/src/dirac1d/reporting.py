"""Output writers: delimited text files and rendered figures.

Every data file starts with a header block of '#'-prefixed lines that
echoes the package version and the full run configuration, so any file
is reproducible from its own header. Numbers are written with %.17g,
which round-trips IEEE doubles exactly; two runs that produce the same
floating-point values therefore produce byte-identical files.

Figures are rendered through the Agg backend straight to PNG, one per
report, sitting next to the data file they visualize.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import __version__

FMT = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, complex):
        im = FMT % value.imag
        sign = "" if im.startswith("-") else "+"
        return "%s%s%sj" % (FMT % value.real, sign, im)
    return FMT % value


def header_lines(config, extra=()):
    """Header block: version, config echo, then any extra key=value pairs."""
    lines = [f"# dirac1d {__version__}"]
    for key, value in config.header_items():
        lines.append(f"# {key} = {value}")
    for key, value in extra:
        lines.append(f"# {key} = {value}")
    return lines


def write_table(path, config, columns, names, extra=()):
    """Write named columns of equal length as comma-separated text."""
    columns = [np.asarray(c) for c in columns]
    n = columns[0].shape[0]
    for c in columns:
        if c.shape != (n,):
            raise ValueError("columns must be 1-d and equally long")
    with open(path, "w") as fh:
        for line in header_lines(config, extra):
            fh.write(line + "\n")
        fh.write(",".join(names) + "\n")
        ints = [np.issubdtype(c.dtype, np.integer) for c in columns]
        for i in range(n):
            fh.write(
                ",".join(
                    ("%d" % c[i]) if k else _fmt(c[i])
                    for c, k in zip(columns, ints)
                )
                + "\n"
            )


def write_heatmap(path, config, times, x, values, extra=()):
    """Write a (t, x) field: first row is x, first column is t."""
    values = np.asarray(values)
    if values.shape != (len(times), len(x)):
        raise ValueError("values must have shape (len(times), len(x))")
    with open(path, "w") as fh:
        for line in header_lines(config, extra):
            fh.write(line + "\n")
        fh.write("t\\x," + ",".join(_fmt(v) for v in x) + "\n")
        for i, t in enumerate(times):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in values[i]) + "\n")


def write_spinor(path, config, grid, field, extra=()):
    density = np.abs(field.upper) ** 2 + np.abs(field.lower) ** 2
    write_table(
        path,
        config,
        [grid.x, field.upper.real, field.upper.imag,
         field.lower.real, field.lower.imag, density],
        ["x", "re_upper", "im_upper", "re_lower", "im_lower", "density"],
        extra=extra,
    )


def write_site_fields(path, config, grid, potential, mass, extra=()):
    v = np.broadcast_to(np.asarray(potential, dtype=float), grid.x.shape)
    m = np.broadcast_to(np.asarray(mass, dtype=float), grid.x.shape)
    write_table(path, config, [grid.x, v, m], ["x", "potential", "mass"], extra=extra)


def write_width_series(path, config, times, w_mean, w_std=None, n_samples=None, extra=()):
    """Ensemble series (t, W_mean, W_std, n_samples) or single run (t, W)."""
    if w_std is None:
        write_table(path, config, [times, w_mean], ["t", "W"], extra=extra)
        return
    columns = [times, w_mean, w_std]
    names = ["t", "W_mean", "W_std"]
    if n_samples is not None:
        columns.append(np.full(len(times), n_samples, dtype=np.int64))
        names.append("n_samples")
    write_table(path, config, columns, names, extra=extra)


def write_sweep(path, config, sweep, extra=()):
    strengths = np.asarray(sweep.strengths, dtype=float)
    n = strengths.size
    columns = [
        strengths,
        np.full(n, sweep.t_star),
        sweep.w_mean,
        sweep.w_std,
        np.full(n, sweep.n_samples, dtype=np.int64),
        np.full(n, sweep.master_seed, dtype=np.int64),
        np.full(n, sweep.d_x),
        np.full(n, sweep.n_points, dtype=np.int64),
    ]
    names = ["s", "t_star", "W_mean", "W_std", "n_samples",
             "master_seed", "d_x", "n_points"]
    write_table(
        path,
        config,
        columns,
        names,
        extra=(("kind", sweep.kind),) + tuple(extra),
    )


def write_fit(path, config, strengths, w_mean, fit, extra=()):
    info = [
        ("fit_a", _fmt(fit.a)),
        ("fit_b", _fmt(fit.b)),
        ("fit_nu", _fmt(fit.nu)),
        ("fit_r_squared", _fmt(fit.r_squared)),
        ("fit_converged", str(fit.converged).lower()),
        ("fit_iterations", fit.iterations),
    ]
    model = (fit.a * np.asarray(strengths) + fit.b) ** (-fit.nu)
    write_table(
        path,
        config,
        [np.asarray(strengths), np.asarray(w_mean), model, fit.residuals],
        ["strength", "w_mean", "model", "residual"],
        extra=tuple(info) + tuple(extra),
    )


def read_table(path):
    """Parse a file written by write_table: (meta dict, {name: column}).

    Header lines '# key = value' land in meta as strings; the version
    banner lands under 'version'.
    """
    meta = {}
    names = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                elif body.startswith("dirac1d"):
                    meta["version"] = body.split(None, 1)[1]
                continue
            if names is None:
                names = [c.strip() for c in line.split(",")]
                continue
            rows.append([float(v) for v in line.split(",")])
    if names is None or not rows:
        raise ValueError(f"no data rows in {path}")
    data = np.asarray(rows, dtype=float)
    return meta, {name: data[:, i] for i, name in enumerate(names)}


# Figures. Each helper saves one PNG and closes its figure so long CLI
# runs do not accumulate open canvases.


def plot_heatmap(path, times, x, values, title, clabel):
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    mesh = ax.pcolormesh(x, times, np.asarray(values), shading="auto", cmap="inferno")
    fig.colorbar(mesh, ax=ax, label=clabel)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_series(path, x, curves, labels, xlabel, ylabel, title, logy=False):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for curve, label in zip(curves, labels):
        ax.plot(x, curve, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if any(labels):
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep_fit(path, strengths, w_mean, w_std, fit, title):
    s = np.asarray(strengths, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.errorbar(s, w_mean, yerr=w_std, fmt="o", capsize=3, label="ensemble")
    if fit is not None:
        dense = np.linspace(s.min(), s.max(), 256)
        ax.plot(
            dense,
            (fit.a * dense + fit.b) ** (-fit.nu),
            "-",
            label=f"(a s + b)^(-nu), nu={fit.nu:.4f}",
        )
    ax.set_xlabel("disorder strength")
    ax.set_ylabel("localization width")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
