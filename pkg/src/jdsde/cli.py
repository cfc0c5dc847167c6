"""Batch front end: config parsing, subcommands and artifact emission.

Configs are INI files with sections [model], [intensity] and [run].  Every
artifact starts with a commented copy of the fully resolved config; passing
an artifact back as ``--config`` reruns the same experiment.
"""

from __future__ import annotations

import argparse
import configparser
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import errorlab, meshdesign, model as models, pathkit, scheme
from .errors import ContractError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT, EXIT_NUMERICAL = 0, 1, 2, 3

BEGIN, END = "# --- config ---", "# --- end config ---"

# name -> ordered (key, default); None marks a required key
MODEL_KEYS = {
    "merton": [("r", None), ("sigma", None), ("lam", None), ("x0", 1.0), ("T", 1.0)],
    "pure-diffusion": [("r", 0.05), ("sigma", 0.5), ("x0", 1.0), ("T", 1.0)],
    "pure-jump-additive": [("kappa", 1.0), ("c0", 0.5), ("c1", 0.0), ("x0", 1.0), ("T", 1.0)],
    "polynomial": [(f"{f}{k}", 0.0) for f in "abc" for k in range(3)] + [("x0", 1.0), ("T", 1.0)],
}

INTENSITY_KEYS = {
    "constant": [("rate", 1.0)],
    "linear": [("rate0", 1.0), ("slope", 0.0)],
    "periodic": [("rate0", 1.0), ("amplitude", 0.5), ("period", 1.0)],
}

RUN_KEYS = ["method", "mesh", "n", "M", "M_pilot", "pilot_grid_size", "eval_grid_size",
            "reference", "floor_eps", "seed", "mode", "threads", "figures"]

METHODS = ("linear", "conditional")
MESHES = ("equidistant", "pilot-optimal", "merton-optimal")


class ConfigError(Exception):
    pass


class Config:
    """Resolved experiment configuration."""

    def __init__(self, model_name, model_params, intensity_kind, intensity_params, run):
        self.model_name = model_name
        self.model_params = model_params
        self.intensity_kind = intensity_kind
        self.intensity_params = intensity_params
        self.run = run

    def to_ini(self):
        lines = ["[model]", f"name = {self.model_name}"]
        lines += [f"{k} = {_fmt(v)}" for k, v in self.model_params.items()]
        if self.intensity_kind is not None:
            lines += ["", "[intensity]", f"kind = {self.intensity_kind}"]
            lines += [f"{k} = {_fmt(v)}" for k, v in self.intensity_params.items()]
        lines += ["", "[run]"]
        lines += [f"{k} = {_fmt(self.run[k])}" for k in RUN_KEYS]
        return "\n".join(lines) + "\n"

    def header(self, command):
        body = [f"# jdsde {__version__} {command}", BEGIN]
        body += [("# " + line).rstrip() for line in self.to_ini().splitlines()]
        body.append(END)
        return "\n".join(body) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _extract(text):
    """INI lines and their source line numbers (artifact headers unwrapped)."""
    lines = text.splitlines()
    if BEGIN in (ln.rstrip() for ln in lines):
        start = [ln.rstrip() for ln in lines].index(BEGIN)
        out = []
        for no, ln in enumerate(lines[start + 1:], start + 2):
            if ln.rstrip() == END:
                return out
            if not ln.startswith("#"):
                break
            out.append((no, ln[2:] if ln.startswith("# ") else ln[1:]))
        raise ConfigError("artifact header is not terminated by the end-of-config marker")
    return list(enumerate(lines, 1))


def _key_lines(numbered):
    where, section = {}, None
    for no, ln in numbered:
        m = re.match(r"\s*\[([^\]]+)\]", ln)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = no
            continue
        m = re.match(r"\s*([^#;=:\s][^=:]*?)\s*[=:]", ln)
        if m and section is not None:
            where[(section, m.group(1))] = no
    return where


class _Reader:
    def __init__(self, parser, where, source):
        self.parser, self.where, self.source = parser, where, source

    def fail(self, section, key, msg):
        no = self.where.get((section, key)) or self.where.get((section, None))
        loc = f"{self.source}:{no}" if no else self.source
        field = f"[{section}] {key}" if key else f"[{section}]"
        raise ConfigError(f"{loc}: {field}: {msg}")

    def raw(self, section, key, default=None):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return default

    def number(self, section, key, default, kind=float, low=None, strict=False):
        raw = self.raw(section, key)
        if raw is None:
            if default is None:
                self.fail(section, key, "required key is missing")
            return default
        try:
            v = kind(raw)
        except ValueError:
            self.fail(section, key, f"expected {'an integer' if kind is int else 'a number'}, got {raw!r}")
        if kind is float and not math.isfinite(v):
            self.fail(section, key, f"must be finite, got {raw!r}")
        if low is not None and (v <= low if strict else v < low):
            self.fail(section, key, f"must be {'>' if strict else '>='} {low}, got {raw!r}")
        return v

    def choice(self, section, key, options, default):
        v = self.raw(section, key, default)
        if v not in options:
            self.fail(section, key, f"must be one of {', '.join(options)}, got {v!r}")
        return v

    def unknown(self, section, allowed):
        if not self.parser.has_section(section):
            return
        for key in self.parser.options(section):
            if key not in allowed:
                self.fail(section, key, f"unknown key (expected one of {', '.join(allowed)})")


def _parse_bool(reader, section, key, default):
    raw = reader.raw(section, key)
    if raw is None:
        return default
    if raw.lower() in ("1", "yes", "true", "on"):
        return True
    if raw.lower() in ("0", "no", "false", "off"):
        return False
    reader.fail(section, key, f"expected yes or no, got {raw!r}")


def load_config(path=None, overrides=(), text=None):
    """Parse and validate a config file; ``overrides`` are 'section.key=value'."""
    source = str(path) if path is not None else "<config>"
    if text is None:
        text = "" if path is None else _read(path)
    numbered = _extract(text)
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=(";",))
    parser.optionxform = str
    try:
        parser.read_string("\n".join(ln for _, ln in numbered), source=source)
    except configparser.ParsingError as exc:
        no, ln = exc.errors[0]
        no = numbered[no - 1][0] if 0 < no <= len(numbered) else no
        raise ConfigError(f"{source}:{no}: cannot parse line {ln.strip()!r}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc.message}") from None
    where = _key_lines(numbered)
    for item in overrides:
        m = re.fullmatch(r"\s*([A-Za-z_]+)\.([A-Za-z_0-9]+)\s*=(.*)", item)
        if not m:
            raise ConfigError(f"--set {item!r}: expected section.key=value")
        section, key, value = m.group(1), m.group(2), m.group(3).strip()
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)
        where[(section, key)] = None
    for section in parser.sections():
        if section not in ("model", "intensity", "run"):
            raise ConfigError(f"{source}:{where.get((section, None))}: unknown section [{section}]")
    reader = _Reader(parser, where, f"{source}" if path is not None else "<overrides>")
    return _resolve(reader)


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None


def _resolve(rd):
    name = rd.choice("model", "name", tuple(MODEL_KEYS), "merton")
    keys = MODEL_KEYS[name]
    allowed = ["name"] + [k for k, _ in keys] + (["gamma"] if name == "merton" else [])
    rd.unknown("model", allowed)
    params = {}
    for key, default in keys:
        if name == "merton" and key == "r" and rd.raw("model", "gamma") is not None:
            if rd.raw("model", "r") is not None:
                rd.fail("model", "gamma", "give either r or gamma, not both")
            continue
        params[key] = rd.number("model", key, default)
    if params["T"] <= 0:
        rd.fail("model", "T", "horizon must be positive")
    if name == "merton":
        for key in ("sigma", "lam", "x0"):
            if params[key] <= 0:
                rd.fail("model", key, "must be positive")
        if "r" not in params:
            gamma = rd.number("model", "gamma", None)
            params = {"r": gamma - 0.5 * params["sigma"] ** 2 - 1.5 * params["lam"], **params}

    if name == "merton":
        if rd.parser.has_section("intensity"):
            rd.fail("intensity", None, "the merton model uses its own constant intensity lam")
        kind, iparams = None, {}
    else:
        kind = rd.choice("intensity", "kind", tuple(INTENSITY_KEYS), "constant")
        rd.unknown("intensity", ["kind"] + [k for k, _ in INTENSITY_KEYS[kind]])
        iparams = {k: rd.number("intensity", k, d) for k, d in INTENSITY_KEYS[kind]}
        if kind == "periodic" and iparams["period"] <= 0:
            rd.fail("intensity", "period", "must be positive")

    rd.unknown("run", RUN_KEYS)
    run = {}
    run["method"] = rd.choice("run", "method", METHODS, "linear")
    run["mesh"] = rd.choice("run", "mesh", MESHES, "equidistant")
    if run["mesh"] == "merton-optimal" and name != "merton":
        rd.fail("run", "mesh", "merton-optimal needs the merton model")
    raw_n = rd.raw("run", "n", "64,128,256")
    try:
        n_list = [int(v) for v in raw_n.split(",") if v.strip()]
    except ValueError:
        rd.fail("run", "n", f"expected comma-separated integers, got {raw_n!r}")
    if not n_list or n_list[0] < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        rd.fail("run", "n", "must be strictly increasing integers >= 2")
    run["n"] = n_list
    run["M"] = rd.number("run", "M", 1000, int, 2)
    run["M_pilot"] = rd.number("run", "M_pilot", 2000, int, 100)
    run["pilot_grid_size"] = rd.number("run", "pilot_grid_size", 512, int, 2)
    run["eval_grid_size"] = rd.number("run", "eval_grid_size", 16 * n_list[-1], int, 1)
    has_exact = name in ("merton", "pure-diffusion")
    reference = rd.raw("run", "reference", "merton-exact" if has_exact else "fine-milstein:16")
    try:
        ref_name, _ = errorlab.parse_reference(reference)
    except ValueError as exc:
        rd.fail("run", "reference", str(exc))
    if ref_name == "self":
        rd.fail("run", "reference", "a convergence study needs a true reference")
    if ref_name == "merton-exact" and not has_exact:
        rd.fail("run", "reference", f"no closed-form solution for model {name!r}")
    run["reference"] = reference
    run["floor_eps"] = rd.number("run", "floor_eps", 1e-6, float, 0.0)
    seed = rd.number("run", "seed", 0, int, 0)
    if seed >= 2 ** 64:
        rd.fail("run", "seed", "must fit in 64 bits")
    run["seed"] = seed
    run["mode"] = rd.choice("run", "mode", ("det", "fast"), "det")
    run["threads"] = rd.number("run", "threads", 1, int, 1)
    if run["threads"] == 1:
        run["mode"] = "det"
    run["figures"] = _parse_bool(rd, "run", "figures", True)
    return Config(name, params, kind, iparams, run)


# ---------------------------------------------------------------------------
# Building objects
# ---------------------------------------------------------------------------

def build(cfg):
    """(SdeModel, IntensityModel, MertonParams or None) for a config."""
    p = dict(cfg.model_params)
    mp = None
    if cfg.model_name == "merton":
        mp = models.MertonParams(**p)
        model, intensity = models.merton(mp)
        return model, intensity, mp
    if cfg.model_name == "pure-diffusion":
        model = models.pure_diffusion(**p)
    elif cfg.model_name == "pure-jump-additive":
        model = models.pure_jump_additive(**p)
    else:
        model = models.polynomial(a=[p[f"a{k}"] for k in range(3)], b=[p[f"b{k}"] for k in range(3)],
                                  c=[p[f"c{k}"] for k in range(3)], x0=p["x0"], T=p["T"])
    T = model.T
    q = cfg.intensity_params
    if cfg.intensity_kind == "constant":
        intensity = models.IntensityModel.constant(q["rate"])
    elif cfg.intensity_kind == "linear":
        intensity = models.IntensityModel.linear(q["rate0"], q["slope"], T)
    else:
        rate0, amp, period = q["rate0"], q["amplitude"], q["period"]
        intensity = models.IntensityModel.from_function(
            lambda t: rate0 * (1.0 + amp * np.sin(2.0 * np.pi * np.asarray(t, dtype=float) / period)),
            T, rate0 * (1.0 + abs(amp)), description=f"periodic({rate0}, {amp}, {period})")
    return model, intensity, mp


def _pilot(cfg, model, intensity, cache=None):
    if cache is not None and Path(cache).exists():
        pilot = meshdesign.PilotEstimate.from_csv(cache, cfg.run["M_pilot"])
        if abs(pilot.grid[-1] - model.T) > 1e-12 * model.T:
            raise ConfigError(f"{cache}: pilot cache covers [0, {pilot.grid[-1]}], model horizon is {model.T}")
        return pilot
    pilot = meshdesign.pilot_expected_y(model, intensity, cfg.run["pilot_grid_size"], cfg.run["M_pilot"],
                                        cfg.run["seed"])
    if cache is not None:
        pilot.to_csv(cache, cfg.header("pilot"))
    return pilot


def _density(cfg, model, intensity, cache):
    if cfg.run["mesh"] != "pilot-optimal":
        return None, None
    pilot = _pilot(cfg, model, intensity, cache)
    return pilot, meshdesign.optimal_density(pilot, cfg.run["floor_eps"])


def _mesh(cfg, model, mp, density, n):
    kind = cfg.run["mesh"]
    if kind == "equidistant":
        return meshdesign.equidistant_mesh(model.T, n)
    if kind == "merton-optimal":
        return meshdesign.merton_optimal_mesh(mp, n)
    return meshdesign.mesh_from_density(density, n)


def _outdir(path):
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"--out {path}: cannot create directory ({exc.strerror})") from None
    probe = out / ".jdsde-write-test"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"--out {path}: directory is not writable ({exc.strerror})") from None
    return out


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return str(path)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_check(cfg, args, out):
    model, intensity, _ = build(cfg)
    comm = models.check_commutativity(model)
    deriv = models.check_derivatives(model)
    try:
        intensity.validate(model.T)
        inten_ok, note = True, ""
    except ContractError as exc:
        inten_ok, note = False, f"  ({exc})"
    print(f"commutativity max_violation={comm.max_violation:.3e} {'pass' if comm.passed else 'FAIL'}")
    print(f"derivatives max_violation={deriv.max_violation:.3e} {'pass' if deriv.passed else 'FAIL'}")
    print(f"intensity {intensity.description} {'pass' if inten_ok else 'FAIL'}{note}")
    return EXIT_OK if comm.passed and deriv.passed and inten_ok else EXIT_CONTRACT


def cmd_mesh(cfg, args, out):
    model, intensity, mp = build(cfg)
    _, density = _density(cfg, model, intensity, args.pilot_cache)
    files = []
    for n in cfg.run["n"]:
        mesh = _mesh(cfg, model, mp, density, n)
        rows = "".join(f"{i},{float(t)!r}\n" for i, t in enumerate(mesh.knots))
        files.append(_write(out / f"mesh_{cfg.run['mesh']}_n{n}.csv", cfg.header("mesh") + "i,t\n" + rows))
    return files


def cmd_pilot(cfg, args, out):
    model, intensity, _ = build(cfg)
    pilot = _pilot(cfg, model, intensity, args.pilot_cache)
    density = meshdesign.optimal_density(pilot, cfg.run["floor_eps"])
    header = cfg.header("pilot")
    files = [str(out / "pilot.csv"), str(out / "density.csv")]
    pilot.to_csv(files[0], header)
    density.to_csv(files[1], header)
    if cfg.run["figures"]:
        from .plotting import render_pilot
        files.append(str(out / "pilot.png"))
        render_pilot(pilot, density, files[-1])
    for name in ("equidistant", "noneq-optimal"):
        c = errorlab.asymptotic_constant(pilot, name)
        print(f"{name} constant {c!r} +- {errorlab.constant_stderr(pilot, name)!r}")
    return files


def _expected_y(cfg, model, intensity, mp, cache):
    if mp is not None:
        grid = np.linspace(0.0, model.T, 4097)
        return grid, meshdesign.merton_expected_y(mp, grid), None
    pilot = _pilot(cfg, model, intensity, cache)
    return pilot.grid, pilot.ey_hat, pilot


def cmd_constants(cfg, args, out):
    model, intensity, mp = build(cfg)
    t, ey, pilot = _expected_y(cfg, model, intensity, mp, args.pilot_cache)
    c_eq = errorlab.asymptotic_constant(ey, "equidistant", t)
    c_noneq = errorlab.asymptotic_constant(ey, "noneq-optimal", t)
    if cfg.run["mesh"] == "equidistant":
        density = meshdesign.Density.uniform(model.T)
    elif cfg.run["mesh"] == "merton-optimal":
        density = meshdesign.density_from_expected_y(lambda s: meshdesign.merton_expected_y(mp, s), model.T)
    else:
        density = meshdesign.optimal_density(pilot or meshdesign.PilotEstimate(t, ey, np.zeros_like(ey), 0),
                                             cfg.run["floor_eps"])
    c_psi = errorlab.asymptotic_constant(ey, density, t)
    rows = [("C_eq", c_eq), ("C_noneq", c_noneq), ("C_psi", c_psi), ("C_eq/C_noneq", c_eq / c_noneq)]
    se = {}
    if pilot is not None:
        se = {"C_eq": errorlab.constant_stderr(pilot, "equidistant"),
              "C_noneq": errorlab.constant_stderr(pilot, "noneq-optimal"),
              "C_psi": errorlab.constant_stderr(pilot, density)}
    lines = ["name,value,stderr"] + [f"{k},{v!r},{se.get(k, 0.0)!r}" for k, v in rows]
    for k, v in rows:
        print(f"{k:<14}{v:.6g}" + (f"  +- {se[k]:.2g}" if k in se else ""))
    return [_write(out / "constants.csv", cfg.header("constants") + "\n".join(lines) + "\n")]


def cmd_converge(cfg, args, out):
    model, intensity, mp = build(cfg)
    pilot, density = _density(cfg, model, intensity, args.pilot_cache)
    mesh_kind = {"pilot-optimal": "density"}.get(cfg.run["mesh"], cfg.run["mesh"])
    expected_y = pilot
    if expected_y is None and mp is None:
        expected_y = _pilot(cfg, model, intensity, args.pilot_cache)
    report = errorlab.convergence_study(
        model, intensity, cfg.run["method"], mesh_kind, cfg.run["n"], cfg.run["M"], cfg.run["reference"],
        cfg.run["seed"], density=density, merton_params=mp, expected_y=expected_y,
        threads=cfg.run["threads"], mode=cfg.run["mode"], eval_grid_size=cfg.run["eval_grid_size"])
    header = cfg.header("converge")
    files = errorlab.emit_report(report, out / "converge", header, figure=cfg.run["figures"])
    sys.stdout.write(errorlab.report_csv_text(report))
    print(f"# slope {report.slope:.4f}  C_psi {report.c_psi:.6g}")
    return files


def cmd_simulate(cfg, args, out):
    model, intensity, mp = build(cfg)
    scheme.check_model(model)
    _, density = _density(cfg, model, intensity, args.pilot_cache)
    n = cfg.run["n"][-1]
    mesh = _mesh(cfg, model, mp, density, n)
    base = np.arange(cfg.run["eval_grid_size"] + 1) * model.T / cfg.run["eval_grid_size"]
    levels = errorlab.noise_levels(cfg.run["eval_grid_size"])
    ref_name, factor = errorlab.parse_reference(cfg.run["reference"])
    fine = mesh.refine(factor) if ref_name == "fine-milstein" else None
    grid = errorlab.merge_grid(mesh.knots if fine is None else fine.knots, base, model.T)
    path = pathkit.simulate_path(grid, intensity, pathkit.RngStream(cfg.run["seed"], 0), levels=levels)
    traj = scheme.build_trajectory(cfg.run["method"], model, mesh, path, intensity, check=False)
    x_hat = traj.eval(grid)
    if fine is None:
        x_ref = model.exact(grid, path.w, path.n)
    else:
        idx = np.searchsorted(grid, fine.knots)
        wk, nk = path.w[idx], path.n[idx]
        xf = scheme.milstein_knots(model, fine.knots, np.diff(wk), np.diff(nk).astype(float))
        x_ref = scheme.continuous_milstein(model, fine.knots, xf, wk, nk, grid, path.w, path.n)
    header = cfg.header("simulate")
    body = "".join(f"{float(t)!r},{float(w)!r},{int(k)},{float(a)!r},{float(b)!r}\n"
                   for t, w, k, a, b in zip(grid, path.w, path.n, x_hat, x_ref))
    files = [_write(out / "path.csv", header + "t,W,N,x_hat,x_ref\n" + body)]
    jumps = "".join(f"{float(t)!r},{float(w)!r}\n" for t, w in zip(path.jumps.times, path.w_jumps))
    files.append(_write(out / "jumps.csv", header + "t,W\n" + jumps))
    if cfg.run["figures"]:
        from .plotting import render_path
        files.append(str(out / "path.png"))
        render_path(grid, x_hat, x_ref, mesh, files[-1])
    return files


COMMANDS = {
    "check": (cmd_check, "check jump commutativity, derivatives and the intensity"),
    "mesh": (cmd_mesh, "write mesh knots for each n"),
    "pilot": (cmd_pilot, "estimate E Y(t) and the optimal density"),
    "converge": (cmd_converge, "run a convergence study"),
    "constants": (cmd_constants, "print the asymptotic constants"),
    "simulate": (cmd_simulate, "dump one simulated path and its approximation"),
}


def make_parser():
    parser = argparse.ArgumentParser(prog="jdsde", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"jdsde {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="INI config, or an artifact whose header holds one")
        p.add_argument("--seed", type=int, help="master seed (overrides [run] seed)")
        p.add_argument("--threads", type=int, help="worker threads (1 forces det mode)")
        p.add_argument("--mode", choices=("det", "fast"), help="reduction order")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--pilot-cache", help="load the pilot estimate from this CSV, or store it there")
        p.add_argument("--no-figures", action="store_true", help="skip the PNG figures")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    overrides = list(args.set)
    for key in ("seed", "threads", "mode"):
        value = getattr(args, key)
        if value is not None:
            overrides.append(f"run.{key}={value}")
    if args.no_figures:
        overrides.append("run.figures=no")
    func = COMMANDS[args.command][0]
    try:
        cfg = load_config(args.config, overrides)
        out = _outdir(args.out) if args.command != "check" else None
        result = func(cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractError as exc:
        print(f"contract failure: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if isinstance(result, int):
        return result
    for f in result:
        print(f"wrote {f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
