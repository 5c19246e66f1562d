"""Configuration-driven experiment runner.

An experiment is described by a YAML file (nested key-value): a target, a
list of samplers, chain length, repetitions and a master seed. Running the
experiment writes one plain-text sample file per chain plus a
machine-readable ``summary.json``; everything is deterministic given the
master seed (timestamps only appear in a separate log file).

Config schema (defaults in brackets)::

    name: <string>
    target:
      kind: uniform | bingham | vmf | mixture_vmf | curved_vmf
      dim: <int >= 3>
      # bingham: kappas: [0, ...]  or  kappa_max: <float>  (0, ..., 0, max)
      # vmf: kappa: <float>, mu: [...] or mu_seed: <int>
      # mixture_vmf: kappa, n_components, means: [[...]] or means_seed: <int>
      # curved_vmf: kappa, n_waypoints, waypoints: [[...]] or waypoints_seed
    n_steps: <int>
    repetitions: <int> [3]
    seed: <uint64> [0]
    initial: mode | uniform | explicit [mode]
    initial_point: [...]              # required when initial == explicit
    thinning: <int> [1]               # persist every k-th state
    grid_cells: <int> [0]             # >0 enables discretized-target KL
    samplers:
      - kind: geosss_reject | geosss_shrink | geodesic_walk | rwmh | hmc
        label: <string> [kind]
        step_size: <float>            # rwmh/hmc (required), walk fixed/chi
        leapfrog_steps: <int> [10]
        max_rejections: <int> [1e6]
        tau: {kind: uniform|fixed|chi_scaled|kac, epsilon: <float>}  # walk
        tuning: {enabled: <bool>, burn_in: <int> [10% of n_steps]}
    paper_scale:                      # optional overrides behind --paper-scale
      n_steps: <int>
      repetitions: <int>
      thinning: <int>
"""

import json
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import diagnostics, exact, targets
from .errors import ConfigError, SphereMCError
from .samplers import SamplerConfig, TauSpec, TuningConfig, run_chain

TARGET_KINDS = ("uniform", "bingham", "vmf", "mixture_vmf", "curved_vmf")
INITIAL_POLICIES = ("mode", "uniform", "explicit")


def load_config(path_or_name):
    """Load a config from a path, or from the bundled set by bare name."""
    path = Path(path_or_name)
    if not path.exists():
        bundled = {p.stem: p for p in bundled_config_paths()}
        if str(path_or_name) in bundled:
            path = bundled[str(path_or_name)]
        else:
            raise ConfigError("config", f"no such file or bundled config: {path_or_name}")
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping")
    return raw


def bundled_config_paths():
    """Paths of the experiment configs shipped with the package."""
    root = resources.files("spheremc") / "configs"
    return sorted(p for p in root.iterdir() if p.name.endswith(".yaml"))


def _require(mapping, key, field, types, predicate=None, message=None):
    if key not in mapping:
        raise ConfigError(field, "missing required field")
    value = mapping[key]
    allowed = types if isinstance(types, tuple) else (types,)
    if isinstance(value, bool) or not isinstance(value, allowed):
        names = "/".join(t.__name__ for t in allowed)
        raise ConfigError(field, f"expected {names}, got {type(value).__name__}")
    if predicate is not None and not predicate(value):
        raise ConfigError(field, message or "invalid value")
    return value


def _seeded_points(seed, n, dim):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return np.stack([exact.sample_uniform(dim, rng) for _ in range(n)])


def build_target(spec):
    """Construct the target object described by the ``target`` section."""
    if not isinstance(spec, dict):
        raise ConfigError("target", "must be a mapping")
    kind = _require(spec, "kind", "target.kind", str)
    if kind not in TARGET_KINDS:
        raise ConfigError("target.kind", f"unknown kind {kind!r} (choose from {TARGET_KINDS})")
    dim = _require(spec, "dim", "target.dim", int, lambda v: v >= 3, "must be >= 3")

    if kind == "uniform":
        return targets.Uniform(dim)

    if kind == "bingham":
        if "kappas" in spec:
            kappas = np.asarray(spec["kappas"], dtype=float)
            if kappas.size != dim:
                raise ConfigError("target.kappas", f"expected {dim} entries")
        else:
            # single-eigenvalue spectrum (0, ..., 0, kappa_max): a bimodal
            # target peaked at the top eigenvector and flat orthogonally
            kappa_max = _require(
                spec, "kappa_max", "target.kappa_max", (int, float), lambda v: v > 0, "must be > 0"
            )
            kappas = np.zeros(dim)
            kappas[-1] = float(kappa_max)
        try:
            return targets.Bingham(kappas)
        except ValueError as err:
            raise ConfigError("target.kappas", str(err)) from err

    kappa = _require(spec, "kappa", "target.kappa", (int, float), lambda v: v > 0, "must be > 0")

    if kind == "vmf":
        if "mu" in spec:
            mu = np.asarray(spec["mu"], dtype=float)
        else:
            mu_seed = _require(spec, "mu_seed", "target.mu_seed", int)
            mu = _seeded_points(mu_seed, 1, dim)[0]
        if mu.size != dim:
            raise ConfigError("target.mu", f"expected {dim} coordinates")
        return targets.VonMisesFisher(mu, float(kappa))

    if kind == "mixture_vmf":
        if "means" in spec:
            means = np.asarray(spec["means"], dtype=float)
        else:
            n_comp = _require(
                spec,
                "n_components",
                "target.n_components",
                int,
                lambda v: v >= 1,
                "must be >= 1",
            )
            means_seed = _require(spec, "means_seed", "target.means_seed", int)
            means = _seeded_points(means_seed, n_comp, dim)
        if means.ndim != 2 or means.shape[1] != dim:
            raise ConfigError("target.means", f"expected shape (K, {dim})")
        return targets.VonMisesFisherMixture(means, float(kappa))

    # curved_vmf
    if "waypoints" in spec:
        points = np.asarray(spec["waypoints"], dtype=float)
    else:
        n_way = _require(
            spec, "n_waypoints", "target.n_waypoints", int, lambda v: 2 <= v <= 12,
            "must be between 2 and 12",
        )
        way_seed = _require(spec, "waypoints_seed", "target.waypoints_seed", int)
        points = _seeded_points(way_seed, n_way, dim)
    if points.ndim != 2 or points.shape[1] != dim:
        raise ConfigError("target.waypoints", f"expected shape (m, {dim})")
    try:
        return targets.CurvedVonMisesFisher.from_unordered_points(points, float(kappa))
    except ValueError as err:
        raise ConfigError("target.waypoints", str(err)) from err


def build_sampler_config(entry, index, n_steps):
    """Resolve one ``samplers`` list entry into a ``SamplerConfig``."""
    field = f"samplers[{index}]"
    if not isinstance(entry, dict):
        raise ConfigError(field, "must be a mapping")
    kind = _require(entry, "kind", f"{field}.kind", str)

    tau = None
    if "tau" in entry:
        tau_spec = entry["tau"]
        if not isinstance(tau_spec, dict) or "kind" not in tau_spec:
            raise ConfigError(f"{field}.tau", "must be a mapping with a 'kind'")
        try:
            tau = TauSpec(tau_spec["kind"], float(tau_spec.get("epsilon", 0.0)))
        except ValueError as err:
            raise ConfigError(f"{field}.tau", str(err)) from err

    tuning_spec = entry.get("tuning", {})
    if not isinstance(tuning_spec, dict):
        raise ConfigError(f"{field}.tuning", "must be a mapping")
    enabled = bool(tuning_spec.get("enabled", kind in ("rwmh", "hmc")))
    burn_in = tuning_spec.get("burn_in", round(0.1 * n_steps) if enabled else 0)
    if not isinstance(burn_in, int) or burn_in < 0:
        raise ConfigError(f"{field}.tuning.burn_in", "must be a nonnegative integer")
    tuning = TuningConfig(
        enabled=enabled,
        burn_in=burn_in,
        up=float(tuning_spec.get("up", 1.02)),
        down=float(tuning_spec.get("down", 0.98)),
    )

    step_size = entry.get("step_size")
    if step_size is None and kind in ("rwmh", "hmc"):
        step_size = {"rwmh": 0.5, "hmc": 0.1}[kind]
    try:
        return SamplerConfig(
            kind=kind,
            step_size=None if step_size is None else float(step_size),
            leapfrog_steps=int(entry.get("leapfrog_steps", 10)),
            max_rejections=int(entry.get("max_rejections", 10**6)),
            tau=tau,
            tuning=tuning,
        )
    except ValueError as err:
        raise ConfigError(field, str(err)) from err


def resolve_config(raw, paper_scale=False, seed_override=None):
    """Validate ``raw`` and resolve every default. Returns a plain dict."""
    name = raw.get("name", "experiment")
    target_spec = raw.get("target")
    target = build_target(target_spec)

    scale = {}
    if paper_scale:
        scale = raw.get("paper_scale", {})
        if not isinstance(scale, dict):
            raise ConfigError("paper_scale", "must be a mapping")
    n_steps = scale.get("n_steps", raw.get("n_steps"))
    if not isinstance(n_steps, int) or n_steps < 1:
        raise ConfigError("n_steps", "must be a positive integer")
    repetitions = scale.get("repetitions", raw.get("repetitions", 3))
    if not isinstance(repetitions, int) or repetitions < 1:
        raise ConfigError("repetitions", "must be a positive integer")
    thinning = scale.get("thinning", raw.get("thinning", 1))
    if not isinstance(thinning, int) or thinning < 1:
        raise ConfigError("thinning", "must be a positive integer")

    seed = seed_override if seed_override is not None else raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed", "must be a nonnegative integer")

    initial = raw.get("initial", "mode")
    if initial not in INITIAL_POLICIES:
        raise ConfigError("initial", f"must be one of {INITIAL_POLICIES}")
    initial_point = None
    if initial == "explicit":
        if "initial_point" not in raw:
            raise ConfigError("initial_point", "required when initial == explicit")
        initial_point = np.asarray(raw["initial_point"], dtype=float)
        if initial_point.size != target.dim:
            raise ConfigError("initial_point", f"expected {target.dim} coordinates")

    grid_cells = raw.get("grid_cells", 0)
    if not isinstance(grid_cells, int) or grid_cells < 0:
        raise ConfigError("grid_cells", "must be a nonnegative integer")

    entries = raw.get("samplers")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("samplers", "must be a non-empty list")
    sampler_configs = []
    labels = []
    for i, entry in enumerate(entries):
        cfg = build_sampler_config(entry, i, n_steps)
        label = entry.get("label", cfg.kind)
        if label in labels:
            raise ConfigError(f"samplers[{i}].label", f"duplicate label {label!r}")
        labels.append(label)
        sampler_configs.append(cfg)

    return {
        "name": name,
        "raw": raw,
        "target": target,
        "target_spec": target_spec,
        "n_steps": n_steps,
        "repetitions": repetitions,
        "thinning": thinning,
        "seed": seed,
        "initial": initial,
        "initial_point": initial_point,
        "grid_cells": grid_cells,
        "samplers": sampler_configs,
        "labels": labels,
    }


def _chain_seed(master_seed, chain_index):
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(chain_index,))


def _initial_point(resolved, chain_index):
    policy = resolved["initial"]
    if policy == "mode":
        return resolved["target"].mode()
    if policy == "explicit":
        return resolved["initial_point"]
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=resolved["seed"], spawn_key=(chain_index, 1))
    )
    return exact.sample_uniform(resolved["target"].dim, rng)


def _run_one_chain(raw, paper_scale, seed_override, sampler_index, rep_index):
    """Worker entry point: rebuild everything from the raw config (picklable)."""
    resolved = resolve_config(raw, paper_scale=paper_scale, seed_override=seed_override)
    chain_index = sampler_index * resolved["repetitions"] + rep_index
    config = resolved["samplers"][sampler_index]
    total = resolved["n_steps"] + (config.tuning.burn_in if config.tuning.enabled else 0)
    chain = run_chain(
        resolved["target"],
        config,
        _initial_point(resolved, chain_index),
        total,
        _chain_seed(resolved["seed"], chain_index),
    )
    return chain


def _write_chain_file(path, chain, thinning):
    d = chain.states.shape[1]
    columns = [f"x{i}" for i in range(d)] + ["rejections", "accepted"]
    idx = np.arange(0, len(chain), thinning)
    with open(path, "w") as fh:
        fh.write("\t".join(columns) + "\n")
        for i in idx:
            coords = "\t".join(f"{c:.17g}" for c in chain.states[i])
            fh.write(f"{coords}\t{int(chain.rejections[i])}\t{int(chain.accepted[i])}\n")


def run_experiment(raw, out_dir, workers=1, paper_scale=False, seed_override=None, log=None):
    """Run every sampler/repetition of an experiment and persist the results.

    Writes ``<label>_rep<k>.tsv`` per chain and a ``summary.json``. A chain
    that raises a sampling error is recorded (and skipped in aggregates)
    without aborting its siblings. Returns ``(summary_dict, n_failures)``.
    """
    resolved = resolve_config(raw, paper_scale=paper_scale, seed_override=seed_override)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = resolved["target"]
    grid = (
        diagnostics.SphereGrid.build(target.dim, resolved["grid_cells"])
        if resolved["grid_cells"]
        else None
    )

    jobs = [
        (s, r)
        for s in range(len(resolved["samplers"]))
        for r in range(resolved["repetitions"])
    ]
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                job: pool.submit(_run_one_chain, raw, paper_scale, seed_override, *job)
                for job in jobs
            }
            for job, fut in futures.items():
                try:
                    results[job] = fut.result()
                except SphereMCError as err:
                    results[job] = err
    else:
        for job in jobs:
            try:
                results[job] = _run_one_chain(raw, paper_scale, seed_override, *job)
            except SphereMCError as err:
                results[job] = err

    summary = {
        "name": resolved["name"],
        "seed": resolved["seed"],
        "n_steps": resolved["n_steps"],
        "repetitions": resolved["repetitions"],
        "thinning": resolved["thinning"],
        "paper_scale": bool(paper_scale),
        "target": resolved["target_spec"],
        "samplers": {},
        "totals": {"steps": 0, "rejections": 0},
    }
    n_failures = 0
    for s, (label, config) in enumerate(zip(resolved["labels"], resolved["samplers"])):
        chains_out = []
        reports = []
        for r in range(resolved["repetitions"]):
            result = results[(s, r)]
            if isinstance(result, SphereMCError):
                n_failures += 1
                if log:
                    log(f"chain {label} rep {r} failed: {result}")
                chains_out.append({"rep": r, "status": "error", "message": str(result)})
                continue
            chain = result
            path = out / f"{label}_rep{r}.tsv"
            _write_chain_file(path, chain, resolved["thinning"])
            report = diagnostics.chain_report(chain, target, grid=grid)
            reports.append(report)
            entry = {
                "rep": r,
                "status": "ok",
                "file": path.name,
                "steps": len(chain),
                "burn_in": chain.burn_in,
                "total_rejections": int(chain.rejections.sum()),
                "final_step_size": None
                if chain.final_step_size is None
                else float(chain.final_step_size),
                "diagnostics": report.to_dict(),
            }
            chains_out.append(entry)
            summary["totals"]["steps"] += len(chain)
            summary["totals"]["rejections"] += int(chain.rejections.sum())
        aggregates = {}
        if reports:
            aggregates = {
                "median_relative_ess": float(np.median([r.relative_ess for r in reports])),
                "mean_hopping": float(np.mean([r.hopping for r in reports])),
                "mean_rejections_per_step": float(
                    np.mean([r.rejections_per_step for r in reports])
                ),
            }
            if reports[0].kl_modes is not None:
                aggregates["mean_kl_modes"] = float(np.mean([r.kl_modes for r in reports]))
            if reports[0].kl_grid is not None:
                aggregates["mean_kl_grid"] = float(np.mean([r.kl_grid for r in reports]))
        summary["samplers"][label] = {"chains": chains_out, "aggregates": aggregates}

    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary, n_failures


def describe_config(raw, paper_scale=False):
    """Human-readable resolution of a config, defaults included."""
    resolved = resolve_config(raw, paper_scale=paper_scale)
    target = resolved["target"]
    lines = [
        f"experiment: {resolved['name']}",
        f"target: {type(target).__name__} (dim={target.dim})",
        f"n_steps: {resolved['n_steps']}  repetitions: {resolved['repetitions']}"
        f"  thinning: {resolved['thinning']}",
        f"seed: {resolved['seed']}  initial: {resolved['initial']}"
        f"  grid_cells: {resolved['grid_cells']}",
    ]
    for label, cfg in zip(resolved["labels"], resolved["samplers"]):
        parts = [f"kind={cfg.kind}"]
        if cfg.step_size is not None:
            parts.append(f"step_size={cfg.step_size}")
        if cfg.kind == "hmc":
            parts.append(f"leapfrog_steps={cfg.leapfrog_steps}")
        if cfg.kind == "geodesic_walk":
            parts.append(f"tau={cfg.tau.kind}" + (f"({cfg.tau.epsilon})" if cfg.tau.epsilon else ""))
        if cfg.tuning.enabled:
            parts.append(
                f"tuning=on(burn_in={cfg.tuning.burn_in}, x{cfg.tuning.up}/x{cfg.tuning.down})"
            )
        else:
            parts.append("tuning=off")
        parts.append(f"max_rejections={cfg.max_rejections}")
        lines.append(f"sampler {label}: " + " ".join(parts))
    return "\n".join(lines)
