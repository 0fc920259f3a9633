"""Command-line front end.

Every subcommand reads an optional YAML key-value document (``--config``,
or the positional file of ``run``), which may itself name a bundled
``preset``. Explicit flags and ``--set KEY=VALUE`` pairs override document
keys. Reports are JSON documents that embed the resolved configuration, the
seed and SHA-256 digests of every input file; thread counts and wall-clock
times are kept out of them so that reruns are byte-identical.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__, pipelines, simlab
from .detect import candidates, component_profile
from .diffusion import InfluenceGraph, diffuse, suggest_gamma
from .errors import ConfigError, InputError, NeuroHotnetError
from .graph import NodeSet, WeightedGraph, read_matrix
from .inference import SubjectSample, permutation_tests, select, ttest_variant
from .precision import population_glasso, siggm_with_diffusion

ENV_THREADS = "NEUROHOTNET_THREADS"
PRESET_DIR = Path(__file__).resolve().parent / "presets"
PATH_KEYS = ("structure", "subjects", "influence", "components")
KINDS = ("auto", "signals", "correlation")

PIPELINE_DEFAULTS = {
    "method": "neurohotnet",
    "kind": "auto",
    "gamma": 30.0,
    "delta": 0.155,
    "alpha": 0.05,
    "permutations": 10_000,
    "test_method": "permutation",
    "null": "relabel",
    "ttest_draws": 1,
    "nu": 0.011,
    "eta": 1.0,
    "tol": 1e-6,
    "max_iter": 500,
    "epsilon": 1e-79,
}


# ---------------------------------------------------------------- config


def preset_path(name):
    """Path of a bundled preset (``toy``, ``hcp``, ``study1``)."""
    p = PRESET_DIR / f"{name}.yaml"
    if not p.is_file():
        known = sorted(q.stem for q in PRESET_DIR.glob("*.yaml"))
        raise ConfigError(f"unknown preset {name!r}; available: {known}")
    return p


def load_config(path):
    """Read a YAML document, following a ``preset`` key if present.

    Relative input paths are resolved against the directory of the document
    that defines them. The returned dict maps keys to values; resolved
    filesystem paths are kept separately under ``"_paths"``.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a key-value document")
    out = {"_paths": {}}
    if "preset" in doc:
        out = load_config(preset_path(doc.pop("preset")))
    for k, v in doc.items():
        out[k] = v
        if k in PATH_KEYS and v is not None:
            out["_paths"][k] = path.parent / str(v)
    return out


def _parse_set(pairs):
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = yaml.safe_load(value)
    return out


def resolve(defaults, args, keys):
    """Merge defaults, config document, ``--set`` pairs and explicit flags."""
    cfg = dict(defaults)
    paths = {}
    if getattr(args, "config", None):
        doc = load_config(args.config)
        paths.update(doc.pop("_paths"))
        cfg.update(doc)
    for k, v in _parse_set(getattr(args, "set", None)).items():
        cfg[k] = v
        if k in PATH_KEYS:
            paths[k] = Path(str(v))
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
            if k in PATH_KEYS:
                paths[k] = Path(str(v))
    cfg.pop("preset", None)
    return cfg, paths


def _require(cfg, paths, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise ConfigError(f"missing required setting {k!r}")
        if k in PATH_KEYS and k not in paths:
            paths[k] = Path(str(cfg[k]))


def _seed(cfg):
    if cfg.get("seed") is None:
        raise ConfigError("a seed is required for this command (--seed)")
    try:
        seed = int(cfg["seed"])
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {cfg['seed']!r}") from None
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


def default_threads():
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


# ---------------------------------------------------------------- inputs


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class Inputs:
    """Collects digests of every file read, keyed by the name given."""

    def __init__(self):
        self.digests = {}

    def add(self, name, path):
        self.digests[str(name)] = sha256(path)

    def structure(self, cfg, paths):
        path = paths["structure"]
        self.add(cfg["structure"], path)
        return WeightedGraph.from_csv(path)

    def influence(self, cfg, paths):
        path = paths["influence"]
        self.add(cfg["influence"], path)
        return InfluenceGraph.from_csv(path)

    def subjects(self, cfg, paths):
        root = paths["subjects"]
        if not Path(root).is_dir():
            raise InputError(f"subject directory {root} does not exist")
        files = sorted(Path(root).glob("*.csv"))
        if not files:
            raise InputError(f"no .csv subject files in {root}")
        for f in files:
            self.add(f"{cfg['subjects']}/{f.name}", f)
        return load_subjects(files, cfg.get("kind", "auto"))


def load_subjects(files, kind="auto"):
    """Read subject matrices into ``(labels, [SubjectSample, ...])``.

    Each file is either a T x R signal matrix or an R x R correlation matrix
    under a header of region labels. With ``kind="auto"`` a square file with
    unit diagonal is taken as a correlation matrix.
    """
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    labels = None
    samples = []
    for f in files:
        lab, values = read_matrix(f)
        if labels is None:
            labels = lab
        elif lab != labels:
            raise InputError(f"{f}: region labels differ from the first subject")
        k = kind
        if k == "auto":
            square = values.shape[0] == values.shape[1]
            k = "correlation" if square and np.allclose(np.diag(values), 1.0) \
                else "signals"
        if k == "correlation":
            samples.append(SubjectSample(values, subject_id=Path(f).stem))
        else:
            samples.append(SubjectSample.from_signals(values, Path(f).stem))
    return labels, samples


def _check_labels(structure_labels, labels):
    if list(structure_labels) != list(labels):
        raise InputError("subject region labels do not match the structural "
                         "matrix header")


def components_from_report(path, labels):
    """Node sets listed in a report's ``components`` rows, mapped onto ``labels``.

    Rows may give ``regions`` (names) or ``members`` (0-based indices); a
    bare list of region names or of indices is accepted too.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise InputError(f"cannot read components {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise InputError(f"{path}: invalid document ({exc})") from None
    rows = doc.get("components") if isinstance(doc, dict) else doc
    if not isinstance(rows, list):
        raise InputError(f"{path}: no 'components' list")
    index = {name: i for i, name in enumerate(labels)}
    out = []
    for row in rows:
        if isinstance(row, dict) and "regions" in row:
            names = row["regions"]
        elif isinstance(row, dict) and "members" in row:
            out.append(NodeSet(tuple(int(i) for i in row["members"])))
            continue
        elif isinstance(row, list) and all(isinstance(i, int) for i in row):
            out.append(NodeSet(tuple(row)))
            continue
        elif isinstance(row, list):
            names = row
        else:
            raise InputError(f"{path}: cannot read component row {row!r}")
        missing = [n for n in names if n not in index]
        if missing:
            raise InputError(f"{path}: unknown regions {missing}")
        out.append(NodeSet(tuple(index[n] for n in names)))
    return out


# ---------------------------------------------------------------- reports


def _clean(value):
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def report(command, cfg, inputs, seed=None, **body):
    doc = {
        "tool": "neurohotnet",
        "version": __version__,
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items())
                   if not k.startswith("_")},
        "provenance": {"seed": seed, "inputs": dict(sorted(inputs.digests.items()))},
    }
    doc.update(body)
    return _clean(doc)


def emit(doc, output):
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def write_table(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if x is None else x for x in r])


def _gamma(value, graph):
    if value == "auto":
        return suggest_gamma(graph)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"gamma must be a number or 'auto', got {value!r}") from None


def _grid(text, integer=False):
    try:
        a, b, n = text.split(":")
        values = np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:count, got {text!r}") from None
    if integer:
        return [int(round(v)) for v in values]
    return [float(v) for v in values]


def _degrees(structure):
    return None if structure is None else structure.degrees()


# ---------------------------------------------------------------- commands


def cmd_diffuse(args):
    cfg, paths = resolve({"gamma": "auto"}, args, ("structure", "gamma", "output"))
    _require(cfg, paths, "structure", "output")
    inputs = Inputs()
    g = inputs.structure(cfg, paths)
    gamma = _gamma(cfg["gamma"], g)
    infl = diffuse(g, gamma)
    infl.to_csv(cfg["output"])
    cfg["gamma"] = gamma
    emit(report("diffuse", cfg, inputs, n_nodes=g.n_nodes), None)


def cmd_detect(args):
    cfg, paths = resolve({}, args, ("influence", "delta", "delta_grid",
                                    "structure", "output"))
    _require(cfg, paths, "influence")
    if cfg.get("delta") is None and not cfg.get("delta_grid"):
        _require(cfg, paths, "delta")
    inputs = Inputs()
    infl = inputs.influence(cfg, paths)
    structure = None
    if cfg.get("structure") is not None:
        _require(cfg, paths, "structure")
        structure = inputs.structure(cfg, paths)
        _check_labels(structure.labels, infl.labels)
    body = {}
    if cfg.get("delta") is not None:
        cs = candidates(infl, float(cfg["delta"]))
        body["components"] = pipelines.component_rows(
            "detect", cs.components, infl.labels, _degrees(structure))
    if cfg.get("delta_grid"):
        body["profile"] = component_profile(infl, _grid(cfg["delta_grid"]))
    out = cfg.pop("output", None)
    emit(report("detect", cfg, inputs, **body), out)


def _test_rows(results, labels, structure, method="neurohotnet"):
    rows = pipelines.component_rows(
        method, [r.component for r in results], labels, _degrees(structure),
        [r.p_value for r in results])
    for row, r in zip(rows, results):
        row["statistic"] = r.statistic
        row["selected"] = r.selected
    return rows


def cmd_test(args):
    cfg, paths = resolve(PIPELINE_DEFAULTS, args, (
        "subjects", "components", "alpha", "permutations", "seed",
        "test_method", "null", "kind", "structure", "output"))
    _require(cfg, paths, "subjects", "components")
    cfg.pop("method")
    seed = _seed(cfg)
    inputs = Inputs()
    labels, samples = inputs.subjects(cfg, paths)
    inputs.add(cfg["components"], paths["components"])
    comps = components_from_report(paths["components"], labels)
    structure = None
    if cfg.get("structure") is not None:
        structure = inputs.structure(cfg, paths)
        _check_labels(structure.labels, labels)
    results = _run_tests(samples, comps, cfg, seed, args.threads)
    out = cfg.pop("output", None)
    emit(report("test", _pipeline_config(cfg), inputs, seed,
                components=_test_rows(results, labels, structure, "test")),
         out)


def _run_tests(samples, comps, cfg, seed, threads):
    method = cfg["test_method"]
    if method == "permutation":
        res = permutation_tests(samples, comps, int(cfg["permutations"]), seed,
                                null=cfg["null"], threads=threads)
    elif method == "ttest":
        res = [ttest_variant(samples, c, int(cfg["ttest_draws"]), seed)
               for c in comps]
    else:
        raise ConfigError(f"test_method must be 'permutation' or 'ttest', "
                          f"got {method!r}")
    return select(res, float(cfg["alpha"]))


def _pipeline_config(cfg):
    # keep only the keys that affect the chosen command
    keep = {"method", "structure", "subjects", "components", "kind", "seed"}
    method = cfg.get("method")
    if method == "neurohotnet" or "components" in cfg:
        keep |= {"alpha", "test_method"}
        keep |= {"ttest_draws"} if cfg.get("test_method") == "ttest" \
            else {"permutations", "null"}
    if method == "neurohotnet" and "components" not in cfg:
        keep |= {"gamma", "delta"}
    if method in ("siggm-diffusion", "glasso"):
        keep |= {"nu", "tol", "max_iter", "influence"}
    if method == "siggm-diffusion":
        keep |= {"gamma", "eta"}
    if method == "naive":
        keep |= {"epsilon"}
    return {k: v for k, v in cfg.items() if k in keep}


def cmd_naive(args):
    cfg, paths = resolve(PIPELINE_DEFAULTS, args, (
        "subjects", "epsilon", "kind", "structure", "output"))
    cfg["method"] = "naive"
    _require(cfg, paths, "subjects")
    inputs = Inputs()
    out = cfg.pop("output", None)
    emit(_naive(cfg, paths, inputs), out)


def _naive(cfg, paths, inputs):
    labels, samples = inputs.subjects(cfg, paths)
    structure = _optional_structure(cfg, paths, inputs, labels)
    cs = pipelines.naive(samples, float(cfg["epsilon"]), labels)
    rows = pipelines.component_rows("naive", cs.components, labels,
                                    _degrees(structure))
    return report("naive", _pipeline_config(cfg), inputs, components=rows)


def _optional_structure(cfg, paths, inputs, labels):
    if cfg.get("structure") is None:
        return None
    _require(cfg, paths, "structure")
    structure = inputs.structure(cfg, paths)
    _check_labels(structure.labels, labels)
    return structure


def cmd_glasso(args):
    cfg, paths = resolve(PIPELINE_DEFAULTS, args, (
        "subjects", "influence", "nu", "eta", "tol", "kind", "structure",
        "output"))
    cfg["method"] = "siggm-diffusion" if cfg.get("influence") else "glasso"
    _require(cfg, paths, "subjects")
    inputs = Inputs()
    out = cfg.pop("output", None)
    emit(_glasso(cfg, paths, inputs), out)


def _glasso(cfg, paths, inputs):
    labels, samples = inputs.subjects(cfg, paths)
    structure = _optional_structure(cfg, paths, inputs, labels)
    tol, max_iter = float(cfg["tol"]), int(cfg["max_iter"])
    method = cfg["method"]
    if method == "glasso":
        est = population_glasso(samples, float(cfg["nu"]), tol, max_iter)
    elif cfg.get("influence") is not None:
        _require(cfg, paths, "influence")
        infl = inputs.influence(cfg, paths)
        _check_labels(infl.labels, labels)
        est = siggm_with_diffusion(samples, infl, float(cfg["nu"]),
                                   float(cfg["eta"]), tol, max_iter)
    else:
        if structure is None:
            raise ConfigError("siggm-diffusion needs 'structure' or 'influence'")
        est = pipelines.siggm_diffusion(
            structure, samples, _gamma(cfg["gamma"], structure),
            float(cfg["nu"]), float(cfg["eta"]), tol, max_iter)
    rows = pipelines.component_rows(method, est.components, labels,
                                    _degrees(structure))
    return report(method if method == "glasso" else "siggm-diffusion",
                  _pipeline_config(cfg), inputs, components=rows,
                  n_edges=est.n_edges(), iterations=est.iterations,
                  objective=est.objective[-1])


def cmd_run(args):
    args.config = args.config_file
    cfg, paths = resolve(PIPELINE_DEFAULTS, args, ("seed", "output"))
    method = cfg.get("method")
    if method not in pipelines.LABEL_PREFIX:
        raise ConfigError(f"unknown method {method!r}; choose one of "
                          f"{sorted(pipelines.LABEL_PREFIX)}")
    inputs = Inputs()
    out = cfg.pop("output", None)
    _require(cfg, paths, "subjects")
    if method == "naive":
        doc = _naive(cfg, paths, inputs)
    elif method in ("glasso", "siggm-diffusion"):
        doc = _glasso(cfg, paths, inputs)
    else:
        doc = _neurohotnet(cfg, paths, inputs, args.threads)
    doc["command"] = "run"
    emit(doc, out)


def _neurohotnet(cfg, paths, inputs, threads):
    _require(cfg, paths, "structure")
    seed = _seed(cfg)
    structure = inputs.structure(cfg, paths)
    labels, samples = inputs.subjects(cfg, paths)
    _check_labels(structure.labels, labels)
    gamma = _gamma(cfg["gamma"], structure)
    cfg["gamma"] = gamma
    infl = diffuse(structure, gamma)
    cs = candidates(infl, float(cfg["delta"]))
    results = _run_tests(samples, cs.components, cfg, seed, threads)
    tested = _test_rows(results, labels, structure, "candidates")
    # selected components are relabelled H1, H2, ... in candidate order
    selected = [r for r in results if r.selected]
    rows = _test_rows(selected, labels, structure)
    return report("neurohotnet", _pipeline_config(cfg), inputs, seed,
                  method="neurohotnet", components=rows, candidates=tested)


def _sim_config(cfg, seed):
    cfg = dict(cfg)
    nu_by_r = cfg.pop("nu_by_r", None) or {}
    if cfg.get("nu") is None:
        if not nu_by_r:
            raise ConfigError("simulation needs 'nu' or 'nu_by_r'")
        keys = sorted(int(k) for k in nu_by_r)
        below = [k for k in keys if k <= int(cfg["R"])]
        cfg["nu"] = float(nu_by_r[below[-1] if below else keys[0]])
    fields = simlab.SimConfig.__dataclass_fields__
    unknown = sorted(set(cfg) - set(fields))
    if unknown:
        raise ConfigError(f"unknown simulation settings {unknown}")
    cfg["seed"] = seed
    try:
        return simlab.SimConfig(**cfg)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _sim_settings(args, extra=()):
    if args.config:
        doc = load_config(args.config)
    else:
        doc = load_config(preset_path(args.preset))
    doc.pop("_paths")
    doc.pop("preset", None)
    doc.update(_parse_set(args.set))
    for key, flag in extra:
        v = getattr(args, flag, None)
        if v is not None:
            doc[key] = v
    return doc


def cmd_simulate(args):
    doc = _sim_settings(args, (("R", "r"), ("trials", "trials")))
    seed = _seed({"seed": args.seed})
    sim = _sim_config(doc, seed)
    methods = args.methods.split(",") if args.methods else simlab.METHODS
    res = simlab.run_study1(sim, methods, threads=args.threads)
    body = res.to_dict(timings=False)
    body["config"] = dict(body["config"], methods=list(methods))
    doc = {"tool": "neurohotnet", "version": __version__,
           "command": "simulate", "config": body.pop("config"),
           "provenance": {"seed": seed, "inputs": {}}}
    doc.update(body)
    emit(_clean(doc), args.output)
    if args.table:
        write_table(args.table, ["size", "method", "recovery", "ci", "n",
                                 "failed"],
                    [[sim.R, m, r["mean"], r["half_width"], r["n"],
                      res.failed[m]] for m, r in res.recovery.items()])
    if args.timings:
        emit(_clean({"seconds_per_trial": res.timings}), args.timings)


def cmd_bench(args):
    doc = _sim_settings(args)
    seed = _seed({"seed": args.seed})
    sizes = _grid(args.sizes, integer=True)
    doc["R"] = sizes[0]
    sim = _sim_config(doc, seed)
    res = simlab.run_study2(sizes, args.repeats, sim)
    out = {"tool": "neurohotnet", "version": __version__, "command": "bench",
           "config": res.config, "provenance": {"seed": seed, "inputs": {}},
           "sizes": res.sizes, "trials": res.trials}
    emit(_clean(out), args.output)
    rows = []
    for m, t in res.timings.items():
        for R, mean, hw in zip(sizes, t["mean"], t["half_width"]):
            rows.append([R, m, mean, hw])
    if args.table:
        write_table(args.table, ["size", "method", "runtime", "ci"], rows)
    if args.timings:
        emit(_clean({"timings": res.timings, "slopes": res.slopes}),
             args.timings)
    else:
        for m, s in res.slopes.items():
            print(f"{m}: log-log slope {s:.3f}", file=sys.stderr)


# ---------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(
        prog="neurohotnet",
        description="Structure-informed subnetwork detection in brain "
                    "connectivity data.")
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="YAML settings document")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a setting (repeatable)")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${ENV_THREADS} or "
                             "the number of CPUs)")
        return sp

    sp = common(sub.add_parser("diffuse", help="influence graph from a "
                               "structural matrix"))
    sp.add_argument("--input", dest="structure")
    sp.add_argument("--gamma", help="diffusion rate, or 'auto'")
    sp.add_argument("--output", help="influence matrix CSV")
    sp.set_defaults(func=cmd_diffuse)

    sp = common(sub.add_parser("detect", help="candidate components of a "
                               "thresholded influence graph"))
    sp.add_argument("--influence")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--delta-grid", metavar="A:B:N",
                    help="also report component sizes over this grid")
    sp.add_argument("--structure", help="structural matrix for the degree "
                    "column")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_detect)

    sp = common(sub.add_parser("test", help="permutation tests of given "
                               "components"))
    sp.add_argument("--subjects")
    sp.add_argument("--components", help="report or list of components")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--permutations", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--method", dest="test_method",
                    choices=("permutation", "ttest"))
    sp.add_argument("--null", choices=("relabel", "rows-only"))
    sp.add_argument("--kind", choices=KINDS)
    sp.add_argument("--structure")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_test)

    sp = common(sub.add_parser("naive", help="correlation-only baseline"))
    sp.add_argument("--subjects")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--kind", choices=KINDS)
    sp.add_argument("--structure")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_naive)

    sp = common(sub.add_parser("glasso", help="penalised precision estimate"))
    sp.add_argument("--subjects")
    sp.add_argument("--influence", help="influence matrix for edge-weighted "
                    "penalties")
    sp.add_argument("--nu", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--kind", choices=KINDS)
    sp.add_argument("--structure")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_glasso)

    sp = common(sub.add_parser("run", help="run a configured pipeline"),
                config=False)
    sp.add_argument("config_file", metavar="CONFIG")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_run)

    for name, helptext in (("simulate", "recovery-rate simulation"),
                           ("bench", "runtime scaling benchmark")):
        sp = common(sub.add_parser(name, help=helptext))
        sp.add_argument("--preset", default="study1")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--output", help="JSON report (default stdout)")
        sp.add_argument("--table", help="flat CSV table for plotting")
        sp.add_argument("--timings", help="JSON file for wall-clock times")
        if name == "simulate":
            sp.add_argument("--r", type=int)
            sp.add_argument("--trials", type=int)
            sp.add_argument("--methods", help="comma-separated subset of "
                            + ",".join(simlab.METHODS))
            sp.set_defaults(func=cmd_simulate)
        else:
            sp.add_argument("--sizes", default="50:500:10", metavar="A:B:N")
            sp.add_argument("--repeats", type=int, default=10)
            sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads is None:
            args.threads = default_threads()
        args.func(args)
    except ConfigError as exc:
        print(f"neurohotnet: configuration error: {exc}", file=sys.stderr)
        return 2
    except (NeuroHotnetError, OSError) as exc:
        print(f"neurohotnet: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
