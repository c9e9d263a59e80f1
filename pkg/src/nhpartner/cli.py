"""Command-line front end: spectra, windings, transitions, sweeps, transform checks."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, fields

import numpy as np
import yaml

from . import __version__
from . import models as m
from . import spectra as sp
from . import topology as tp
from . import transforms as tf

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC = 0, 2, 3

MODEL_KEYS = {
    "nhssh": ("t1", "t2", "t3", "gamma"),
    "extended": ("t", "delta", "tprime", "Delta"),
    "soc": ("t", "delta", "tprime", "lam", "lamprime", "soc_kind"),
    "domain-wall": ("tL", "tR", "t2", "phiL", "phiR", "nL", "nR", "topology"),
    "impurity": ("t", "tprime", "phi", "v", "cells", "site"),
}
PARAM_FLAGS = sorted({k for keys in MODEL_KEYS.values() for k in keys})
INT_PARAMS = {"nL", "nR", "cells", "site"}
STR_PARAMS = {"soc_kind", "topology"}

COMMON_DEFAULTS = {"model": "nhssh", "cells": 40, "format": "json", "output": None}
COMMAND_DEFAULTS = {
    "spectrum": {"bc": "obc", "vectors": False, "pairing_tol": None, "zero_tol": None,
                 "balance": True},
    "winding": {"grid": tp.DEFAULT_GRID, "deformation": "gbz"},
    "transitions": {"axis": None, "lo": None, "hi": None, "samples": 81, "numeric": True,
                    "literal_phase": False, "skip_pairs": 1, "jobs": 1},
    "sweep": {"axis": None, "lo": None, "hi": None, "points": 41,
              "observables": "gap,zero_modes,nu_q", "zero_tol": None, "grid": tp.DEFAULT_GRID,
              "edge_cells": 10, "jobs": 1},
    "transform-check": {"transform": "s3"},
    "localization": {"edge_cells": 10, "states": None, "profiles": None},
}


FLOAT_KEYS = {"pairing_tol", "zero_tol", "lo", "hi"}
TEXT_KEYS = {"axis", "output", "states", "profiles", "observables", "model", "format", "bc",
             "deformation", "transform"}


class ParamError(ValueError):
    pass


def _coerce(key: str, value):
    """Config-file values to the flag's type (YAML reads ``1e-5`` as text)."""
    if value is None:
        return None
    if key in TEXT_KEYS or key in STR_PARAMS:
        return str(value)
    defaults = {**COMMON_DEFAULTS, **{k: v for d in COMMAND_DEFAULTS.values() for k, v in d.items()}}
    try:
        if isinstance(defaults.get(key), bool):
            if not isinstance(value, bool):
                raise ValueError("expected true or false")
            return value
        if key in INT_PARAMS or isinstance(defaults.get(key), int):
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError("expected an integer")
            return int(float(value))
        if key in FLOAT_KEYS or key in PARAM_FLAGS:
            if isinstance(value, bool):
                raise ValueError("expected a number")
            return float(value)
    except (TypeError, ValueError) as exc:
        raise ParamError(f"config key {key}: {value!r}: {exc}") from exc
    return value


# --------------------------------------------------------------------------
# Configuration


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="nhpartner", description=__doc__)
    top.add_argument("--version", action="version", version=f"nhpartner {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="YAML file of key: value settings; flags win")
    common.add_argument("--model", choices=sorted(MODEL_KEYS))
    for name in PARAM_FLAGS:
        kind = int if name in INT_PARAMS else (str if name in STR_PARAMS else float)
        common.add_argument(f"--{name}", type=kind, metavar=name.upper())
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--output", "-o", help="write the result here instead of stdout")

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text,
                              argument_default=argparse.SUPPRESS)

    p = add("spectrum", "diagonalize the open and/or periodic chain")
    p.add_argument("--bc", choices=["obc", "pbc", "both"])
    p.add_argument("--vectors", action="store_true", help="include right eigenvectors")
    p.add_argument("--pairing-tol", dest="pairing_tol", type=float)
    p.add_argument("--zero-tol", dest="zero_tol", type=float)
    p.add_argument("--no-balance", dest="balance", action="store_false",
                   help="skip the diagonal pre-scaling before the eigensolver")

    p = add("winding", "winding numbers of the partner Bloch matrix")
    p.add_argument("--grid", type=int)
    p.add_argument("--deformation", choices=sorted(tp.SOC_DEFORMATIONS),
                   help="contour for the SOC blocks")

    p = add("transitions", "analytic and numeric transition points")
    p.add_argument("--axis")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--no-numeric", dest="numeric", action="store_false")
    p.add_argument("--literal-phase", dest="literal_phase", action="store_true")
    p.add_argument("--skip-pairs", dest="skip_pairs", type=int)
    p.add_argument("--jobs", type=int)

    p = add("sweep", "tabulate observables along one parameter")
    p.add_argument("--axis")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--observables", help=f"comma list from {','.join(tp.OBSERVABLES)}")
    p.add_argument("--zero-tol", dest="zero_tol", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--edge-cells", dest="edge_cells", type=int)
    p.add_argument("--jobs", type=int)

    p = add("transform-check", "apply a similarity transform and check its claims")
    p.add_argument("--transform", choices=["s1", "s2", "s1s2", "s3", "s4", "domain-wall",
                                           "impurity"])

    p = add("localization", "edge weights, IPR and skin summary of the open chain")
    p.add_argument("--edge-cells", dest="edge_cells", type=int)
    p.add_argument("--states", help="comma list of state indices for the profile dump")
    p.add_argument("--profiles", help="CSV path for |psi(x)|^2 of the selected states")
    return top


def _load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ParamError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParamError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ParamError(f"config {path} must be a mapping of keys to values")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def resolve_config(command: str, flags: dict) -> dict:
    """Defaults, then the config file, then explicit flags. Unknown keys are errors."""
    allowed = set(COMMON_DEFAULTS) | set(COMMAND_DEFAULTS[command]) | set(PARAM_FLAGS)
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[command])
    flags = dict(flags)
    path = flags.pop("config", None)
    if path:
        from_file = _load_file(path)
        unknown = sorted(set(from_file) - allowed)
        if unknown:
            raise ParamError(f"unknown config keys for {command}: {', '.join(unknown)}")
        cfg.update({k: _coerce(k, v) for k, v in from_file.items()})
    cfg.update(flags)
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ParamError(f"unknown keys for {command}: {', '.join(unknown)}")
    if cfg["model"] not in MODEL_KEYS:
        raise ParamError(f"unknown model {cfg['model']!r}; choose from {sorted(MODEL_KEYS)}")
    return cfg


def build_model(cfg: dict) -> m.ModelSpec:
    family = cfg["model"]
    cls = m.FAMILIES[family]
    names = {f.name for f in fields(cls)}
    kwargs = {k: cfg[k] for k in MODEL_KEYS[family] if cfg.get(k) is not None}
    if family == "impurity" and "cells" not in kwargs:
        kwargs["cells"] = cfg["cells"]
    stray = sorted(k for k in PARAM_FLAGS if cfg.get(k) is not None and k not in names
                   and k != "cells")
    if stray:
        raise ParamError(f"parameters {', '.join(stray)} do not apply to the {family} model")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ParamError(f"{family}: {exc}") from exc


def _cells(cfg: dict, model: m.ModelSpec) -> int | None:
    if isinstance(model, (m.DomainWallParams, m.ImpurityParams)):
        return None
    return int(cfg["cells"])


# --------------------------------------------------------------------------
# Serialization


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def complex_json(z) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_json(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str, bool)):
        return obj.value
    return obj


def envelope(command: str, cfg: dict, payload: dict, warnings: list[str]) -> dict:
    return {"tool": "nhpartner", "version": __version__, "command": command,
            "config": _jsonable(cfg), "warnings": list(warnings), "payload": _jsonable(payload)}


def csv_text(header: list[str], rows: list[list]) -> str:
    """CSV with complex columns already split; floats at 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (fmt(v) if isinstance(v, (float, np.floating)) else v)
                    for v in row])
    return buf.getvalue()


def complex_columns(name: str, values) -> tuple[list[str], list[list[float]]]:
    values = np.asarray(values, dtype=complex)
    return [f"{name}_re", f"{name}_im"], [[float(z.real), float(z.imag)] for z in values]


# --------------------------------------------------------------------------
# Commands


def _spectrum_payload(h: np.ndarray, cfg: dict, warnings: list[str]) -> dict:
    s = sp.eigendecompose(h, want_vectors=bool(cfg["vectors"]), balance=cfg["balance"])
    if not s.converged:
        warnings.append(f"eigensolver residual {s.residual:.3e} exceeds {sp.RESIDUAL_LIMIT:g}")
    tol = cfg["pairing_tol"] if cfg["pairing_tol"] is not None else max(1e-8, 1e-8 * s.norm)
    pairing = sp.chiral_pairing(s, tol)
    ztol = cfg["zero_tol"] if cfg["zero_tol"] is not None else sp.default_zero_tol(h)
    out = {
        "dim": h.shape[0],
        "eigenvalues": s.eigenvalues,
        "gap": sp.spectral_gap(s),
        "zero_modes": sp.zero_modes(s, ztol).count,
        "zero_tol": ztol,
        "pairing": {"paired": pairing.paired, "max_mismatch": pairing.max_mismatch, "tol": tol},
        "residual": s.residual,
        "converged": s.converged,
        "norm": s.norm,
    }
    if cfg["vectors"]:
        out["right_vectors"] = s.right_vectors
    return out


def cmd_spectrum(cfg: dict, model: m.ModelSpec, warnings: list[str]) -> dict:
    cells = _cells(cfg, model)
    payload: dict = {"model": m.family_name(model)}
    if cfg["bc"] in ("obc", "both"):
        payload["obc"] = _spectrum_payload(tp.obc_matrix(model, cells), cfg, warnings)
    if cfg["bc"] in ("pbc", "both"):
        payload["pbc"] = _spectrum_payload(m.build_pbc(model, cells), cfg, warnings)
    if cfg["bc"] == "both":
        dist = sp.hausdorff_one_sided(payload["pbc"]["eigenvalues"], payload["obc"]["eigenvalues"])
        payload["pbc_to_obc_hausdorff"] = dist
        if dist > 0.05 * payload["obc"]["norm"]:
            warnings.append(
                f"periodic and open spectra differ (Hausdorff {dist:.3g}); "
                "non-reciprocal hopping: expect a skin effect in the open chain")
    return payload


def _winding_dict(w: tp.WindingResult) -> dict:
    return asdict(w)


def cmd_winding(cfg: dict, model: m.ModelSpec, warnings: list[str]) -> dict:
    grid = int(cfg["grid"])
    if isinstance(model, m.SocParams):
        res = tp.soc_winding(model, grid, cfg["deformation"])
        return {"model": "soc", "deformation": cfg["deformation"],
                "up": _winding_dict(res.up), "down": _winding_dict(res.down),
                "off_block_residual": res.off_block_residual}
    p = tp._winding_params(model)
    g = tf.gauge_params(p.t1, p.gamma)
    res = tp.winding_numbers(p, grid)
    return {"model": m.family_name(model), "tbar1": g.tbar1, "phi": g.phi, **_winding_dict(res)}


DEFAULT_AXES = {"nhssh": "t1", "domain-wall": "tL", "impurity": "t", "extended": "t",
                "soc": "t"}


def _axis_range(cfg: dict, model: m.ModelSpec) -> tuple[str, float, float]:
    axis = cfg["axis"] or DEFAULT_AXES[m.family_name(model)]
    if cfg["lo"] is None or cfg["hi"] is None:
        raise ParamError("an axis range needs both --lo and --hi")
    lo, hi = float(cfg["lo"]), float(cfg["hi"])
    if not hi > lo:
        raise ParamError(f"empty axis range [{lo}, {hi}]")
    tp.with_axis(model, axis, lo)
    return axis, lo, hi


def _interface_scan(p: m.DomainWallParams, axis: str, lo: float, hi: float, samples: int):
    xs = np.linspace(lo, hi, samples)
    counts = [tp.interface_modes(tp.with_axis(p, axis, float(x))) for x in xs]
    toggles = [float(0.5 * (xs[i] + xs[i + 1])) for i in range(samples - 1)
               if counts[i] != counts[i + 1]]
    return xs, counts, toggles


def cmd_transitions(cfg: dict, model: m.ModelSpec, warnings: list[str]) -> dict:
    axis, lo, hi = _axis_range(cfg, model)
    samples = int(cfg["samples"])
    payload: dict = {"model": m.family_name(model), "axis": axis, "range": [lo, hi]}
    if isinstance(model, m.NhsshParams):
        if axis != "t1":
            raise ParamError("analytic transitions for nhssh are solved along t1")
        roots = tp.transitions_analytic(model.t2, model.t3, model.gamma, (lo, hi),
                                        literal_phase=cfg["literal_phase"])
        payload["analytic"] = roots
    elif isinstance(model, (m.DomainWallParams, m.ImpurityParams)):
        payload["analytic"] = tp.defect_transitions(model)
    else:
        payload["analytic"] = []
        warnings.append(f"no analytic transition condition for the {m.family_name(model)} family")

    if not cfg["numeric"]:
        return payload
    if isinstance(model, m.DomainWallParams):
        xs, counts, toggles = _interface_scan(model, axis, lo, hi, samples)
        payload["numeric"] = toggles
        payload["interface_modes"] = {"grid": xs, "count": counts}
    else:
        cells = _cells(cfg, model)
        num = tp.transitions_numeric(model, axis, lo, hi, cells=cells, samples=samples,
                                     skip_pairs=int(cfg["skip_pairs"]), jobs=int(cfg["jobs"]))
        payload["numeric"] = num.values
        payload["gap_scan"] = {"grid": num.grid, "gap": num.gap, "threshold": num.threshold}
    analytic = payload["analytic"]
    targets = list(analytic.values()) if isinstance(analytic, dict) else list(analytic)
    payload["distances"] = [[a, n, abs(a - n)] for a in targets for n in payload["numeric"]]
    return payload


def cmd_sweep(cfg: dict, model: m.ModelSpec, warnings: list[str]) -> dict:
    axis, lo, hi = _axis_range(cfg, model)
    points = int(cfg["points"])
    if points < 1:
        raise ParamError("--points must be positive")
    obs = [o.strip() for o in str(cfg["observables"]).split(",") if o.strip()]
    values = np.linspace(lo, hi, points) if points > 1 else np.array([lo])
    diagram = tp.sweep(model, axis, values, obs, cells=_cells(cfg, model),
                       zero_tol=cfg["zero_tol"], grid=int(cfg["grid"]),
                       edge_cells=int(cfg["edge_cells"]), jobs=int(cfg["jobs"]))
    failed = sum(1 for r in diagram.rows if "error" in r)
    if failed:
        warnings.append(f"{failed} of {points} grid points failed; see the error column")
    return {"axis": axis, "values": diagram.values, "observables": list(diagram.observables),
            "rows": diagram.rows, "transitions": diagram.transitions}


def _transform_for(label: str, model: m.ModelSpec, cfg: dict):
    """(matrix, transform, claims_hermitian) for one transform label."""
    cells = _cells(cfg, model)
    if label in ("s1", "s2", "s1s2", "s3"):
        if not isinstance(model, m.NhsshParams):
            raise ParamError(f"{label} acts on the nhssh model")
        h = m.obc_nhssh(model, cells)
        claims = label == "s1" and model.t3 == 0
        return h, tf.nhssh_transform(label, model, cells), claims
    if label == "s4":
        if not isinstance(model, m.SocParams):
            raise ParamError("s4 acts on the soc model")
        g = tf.soc_gauge(model)
        return m.obc_soc(model, cells), tf.s4_transform(cells, g.phi), False
    if label == "domain-wall":
        if not isinstance(model, m.DomainWallParams):
            raise ParamError("the domain-wall transform acts on the domain-wall model")
        return m.domain_wall(model), tf.domain_wall_transform(model), \
            model.topology is m.Topology.CHAIN
    if label == "impurity":
        if not isinstance(model, m.ImpurityParams):
            raise ParamError("the impurity transform acts on the impurity model")
        return m.impurity_chain(model), tf.impurity_transform(model), True
    raise ParamError(f"unknown transform {label!r}")


def _entry_summary(h: np.ndarray, digits: int = 12) -> list[dict]:
    i, j = np.nonzero(np.abs(h) > 0)
    counts: dict = {}
    for a, b in zip(i, j):
        key = (round(float(h[a, b].real), digits), round(float(h[a, b].imag), digits),
               "diagonal" if a == b else ("upper" if b > a else "lower"))
        counts[key] = counts.get(key, 0) + 1
    return [{"value": {"re": k[0], "im": k[1]}, "position": k[2], "count": c}
            for k, c in sorted(counts.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1]))]


def cmd_transform_check(cfg: dict, model: m.ModelSpec, warnings: list[str]) -> dict:
    label = cfg["transform"]
    h, s, claims = _transform_for(label, model, cfg)
    warnings.extend(s.warnings)
    ht = tf.apply_similarity(h, s)
    before = sp.eigenvalues(h)
    after = sp.eigenvalues(ht)
    norm = sp.matrix_norm(h)
    payload = {
        "transform": label,
        "dim": h.shape[0],
        "condition": s.condition,
        "spectral_invariance": sp.spectral_distance(before, after) / norm,
        "hermiticity_residual": tf.hermiticity_residual(ht),
        "claims_hermitian": claims,
        "diagonal_before": [complex(z) for z in np.diag(h) if z != 0],
        "diagonal_after": [complex(z) for z in np.diag(ht) if z != 0],
        "entries": _entry_summary(ht),
    }
    if claims and payload["hermiticity_residual"] > 1e-10:
        warnings.append(f"transformed matrix not Hermitian: residual {payload['hermiticity_residual']:.3e}")
    return payload


def cmd_localization(cfg: dict, model: m.ModelSpec, warnings: list[str]) -> dict:
    h = tp.obc_matrix(model, _cells(cfg, model))
    s = sp.eigendecompose(h)
    per_cell = 4 if isinstance(model, m.SocParams) else 2
    edge = int(cfg["edge_cells"])
    rep = sp.localization(s, edge_cells=edge, sites_per_cell=2)
    if per_cell == 4:
        warnings.append("soc chain is spin-major; edge windows count sites of the up-spin half")
    payload = {
        "dim": h.shape[0],
        "edge_cells": edge,
        "eigenvalues": s.eigenvalues,
        "boundary_weight_left": rep.boundary_weight_left,
        "boundary_weight_right": rep.boundary_weight_right,
        "mean_position": rep.mean_position,
        "ipr": rep.ipr,
        "skin_summary": asdict(rep.skin_summary),
    }
    if cfg["states"]:
        try:
            idx = [int(x) for x in str(cfg["states"]).split(",") if x.strip()]
        except ValueError as exc:
            raise ParamError(f"--states must be integers: {exc}") from exc
        bad = [i for i in idx if not 0 <= i < h.shape[0]]
        if bad:
            raise ParamError(f"state indices out of range: {bad}")
        dens = sp.site_densities(s.right_vectors[:, idx])
        payload["profiles"] = {"states": idx, "density": dens.T}
        if cfg["profiles"]:
            header = ["site"] + [f"state_{i}" for i in idx]
            rows = [[x + 1] + [float(v) for v in dens[x]] for x in range(h.shape[0])]
            with open(cfg["profiles"], "w") as fh:
                fh.write(csv_text(header, rows))
    return payload


COMMANDS = {
    "spectrum": cmd_spectrum,
    "winding": cmd_winding,
    "transitions": cmd_transitions,
    "sweep": cmd_sweep,
    "transform-check": cmd_transform_check,
    "localization": cmd_localization,
}


# --------------------------------------------------------------------------
# CSV renderers


def to_csv(command: str, payload: dict) -> str:
    if command == "spectrum":
        rows, header = [], ["bc", "index", "E_re", "E_im"]
        for bc in ("obc", "pbc"):
            if bc in payload:
                for i, z in enumerate(payload[bc]["eigenvalues"]):
                    rows.append([bc, i, float(np.real(z)), float(np.imag(z))])
        return csv_text(header, rows)
    if command == "sweep":
        obs = payload["observables"]
        header = [payload["axis"]] + obs + ["error"]
        rows = [[float(x)] + [r.get(o) for o in obs] + [r.get("error", "")]
                for x, r in zip(payload["values"], payload["rows"])]
        rows = [[float(v) if isinstance(v, float) else v for v in row] for row in rows]
        return csv_text(header, rows)
    if command == "localization":
        header = ["index", "E_re", "E_im", "weight_left", "weight_right", "mean_position", "ipr"]
        rows = [[i, float(np.real(z)), float(np.imag(z)), float(payload["boundary_weight_left"][i]),
                 float(payload["boundary_weight_right"][i]), float(payload["mean_position"][i]),
                 float(payload["ipr"][i])] for i, z in enumerate(payload["eigenvalues"])]
        return csv_text(header, rows)
    if command == "transitions":
        rows = [["analytic", float(v)] for v in (payload["analytic"].values()
                if isinstance(payload["analytic"], dict) else payload["analytic"])]
        rows += [["numeric", float(v)] for v in payload.get("numeric", [])]
        return csv_text(["kind", payload["axis"]], rows)
    if command == "winding":
        flat = {k: v for k, v in payload.items() if not isinstance(v, dict)}
        for block in ("up", "down"):
            for k, v in payload.get(block, {}).items():
                flat[f"{block}_{k}"] = v
        keys = list(flat)
        return csv_text(keys, [[float(flat[k]) if isinstance(flat[k], float) else flat[k]
                                for k in keys]])
    if command == "transform-check":
        header = ["position", "value_re", "value_im", "count"]
        rows = [[e["position"], float(e["value"]["re"]), float(e["value"]["im"]), e["count"]]
                for e in payload["entries"]]
        return csv_text(header, rows)
    raise ParamError(f"no CSV form for {command}")


# --------------------------------------------------------------------------
# Entry point


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_PARAM
    command = ns.command
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    warnings: list[str] = []
    try:
        cfg = resolve_config(command, flags)
        model = build_model(cfg)
        payload = COMMANDS[command](cfg, model, warnings)
    except (ParamError, m.ModelError, tf.BrokenRegimeError) as exc:
        print(f"nhpartner {command}: parameter error: {exc}", file=stderr)
        return EXIT_PARAM
    except (tp.WindingError, tp.ConsistencyError, tf.NotBlockDecomposableError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"nhpartner {command}: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"nhpartner {command}: parameter error: {exc}", file=stderr)
        return EXIT_PARAM

    for w in warnings:
        print(f"warning: {w}", file=stderr)
    if cfg["format"] == "csv":
        text = to_csv(command, _jsonable(payload) if command == "transform-check" else payload)
    else:
        text = json.dumps(envelope(command, cfg, payload, warnings), indent=1) + "\n"
    if cfg["output"]:
        with open(cfg["output"], "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
