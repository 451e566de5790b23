"""Command-line front end.

Subcommands: ``generate``, ``solve``, ``sweep``, ``montecarlo``,
``compare-pf``, ``minimize-power``.  Exit codes: 0 on success, 1 on usage or
configuration errors, 2 when a solve did not converge.  All outputs embed the
config hash, the seed and the tool version; CSV files carry them in a leading
comment line.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__, experiments, io
from .association import Policy, associate
from .errors import ConfigError, InfeasibleError, ModelError
from .interference import Problem
from .model import OVERLAP_NONE, OVERLAP_PAIRWISE, OVERLAP_SPECIFIC
from .optimizer import SolveOptions, minimize_power, optimize
from .scenario import generate, uniform_overlap

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

OVERLAP_CHOICES = {"none": OVERLAP_NONE, "pairwise": OVERLAP_PAIRWISE,
                   "specific": OVERLAP_SPECIFIC}


def parse_offsets(text: str) -> list[float]:
    """Parse ``0,1,3..51`` style offset lists; ``a..b`` steps by 2 by default,
    ``a..b:s`` by ``s``."""
    out: list[float] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            lo_txt, rest = token.split("..", 1)
            step_txt = "2"
            if ":" in rest:
                rest, step_txt = rest.split(":", 1)
            try:
                lo, hi, step = float(lo_txt), float(rest), float(step_txt)
            except ValueError as exc:
                raise ConfigError(f"bad offset range {token!r}") from exc
            if step <= 0 or hi < lo:
                raise ConfigError(f"bad offset range {token!r}")
            val = lo
            while val <= hi + 1e-9:
                out.append(val)
                val += step
        else:
            try:
                out.append(float(token))
            except ValueError as exc:
                raise ConfigError(f"bad offset {token!r}") from exc
    return out


def _overlap_model(name, n_bs, load_ul, load_dl):
    scheme = OVERLAP_CHOICES[name]
    if scheme == OVERLAP_NONE:
        return None
    return uniform_overlap(n_bs, load_ul, load_dl, scheme=scheme)


def _solve_options(cell_specific, theta, trace_mode="full"):
    return SolveOptions(power_mode="cell_specific" if cell_specific else "per_link",
                        theta=theta, trace_mode=trace_mode)


@click.group()
@click.version_option(version=__version__)
def cli():
    """Joint uplink/downlink bandwidth and power optimization toolkit."""


@cli.command("generate")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_generate(config_path, seed, out_path):
    """Draw a scenario from a config file and write it as JSON."""
    config = io.load_config(config_path)
    scenario = generate(config, seed)
    meta = {"seed": seed, "config_hash": io.canonical_hash(io.config_to_dict(config))}
    io.save_scenario(scenario, out_path, meta=meta)
    click.echo(f"wrote {out_path}")


@cli.command("solve")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--policy", "policy_text", required=True)
@click.option("--cell-specific", is_flag=True, default=False)
@click.option("--theta", type=float, default=1.0, show_default=True)
@click.option("--overlap", type=click.Choice(sorted(OVERLAP_CHOICES)), default="none",
              show_default=True)
@click.option("--overlap-load-ul", type=float, default=experiments.DEFAULT_HISTORY_UL,
              show_default=True)
@click.option("--overlap-load-dl", type=float, default=experiments.DEFAULT_HISTORY_DL,
              show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_solve(scenario_path, policy_text, cell_specific, theta, overlap,
              overlap_load_ul, overlap_load_dl, out_dir):
    """Run the three-step optimizer on a stored scenario."""
    with open(scenario_path) as fh:
        scenario_doc = json.load(fh)
    scenario = io.scenario_from_dict(scenario_doc)
    policy = Policy.parse(policy_text)
    assoc = associate(policy, scenario)
    overlap_model = _overlap_model(overlap, scenario.n_bs, overlap_load_ul, overlap_load_dl)
    opts = _solve_options(cell_specific, theta)

    solution = optimize(scenario, policy, opts, overlap=overlap_model, assoc=assoc)

    os.makedirs(out_dir, exist_ok=True)
    meta = {"policy": policy.label, "theta": theta, "overlap": overlap,
            "tool_version": __version__,
            "seed": scenario_doc.get("meta", {}).get("seed"),
            "config_hash": scenario_doc.get("meta", {}).get("config_hash")}
    doc = io.solution_to_dict(solution, assoc, scenario_doc, meta=meta)
    io.write_json(doc, os.path.join(out_dir, "solution.json"))
    solution.trace.to_csv(os.path.join(out_dir, "trace.csv"), meta=meta)
    click.echo(f"lambda={solution.lam:.6g} step={solution.step} "
               f"g1={solution.g1:.6f} g2={solution.g2:.6f} converged={solution.converged}")
    return EXIT_OK if solution.converged else EXIT_NOT_CONVERGED


@cli.command("sweep")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--offsets", "offsets_text", default="0,1,3..51", show_default=True)
@click.option("--overlap", type=click.Choice(sorted(OVERLAP_CHOICES)), default="pairwise",
              show_default=True)
@click.option("--overlap-load-ul", type=float, default=experiments.DEFAULT_HISTORY_UL)
@click.option("--overlap-load-dl", type=float, default=experiments.DEFAULT_HISTORY_DL)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_sweep(scenario_path, offsets_text, overlap, overlap_load_ul, overlap_load_dl, out_dir):
    """Sweep cell-selection offsets on one scenario; report the top three."""
    with open(scenario_path) as fh:
        scenario_doc = json.load(fh)
    scenario = io.scenario_from_dict(scenario_doc)
    offsets = parse_offsets(offsets_text)
    overlap_model = _overlap_model(overlap, scenario.n_bs, overlap_load_ul, overlap_load_dl)
    opts = SolveOptions(trace_mode="boundary")

    rows = []
    all_converged = True
    for off in offsets:
        policy = Policy("deud_o", offset_db=off)
        sol = optimize(scenario, policy, opts, overlap=overlap_model)
        rows.append((off, sol.lam, sol.g1, sol.g2, sol.step, int(sol.converged),
                     policy.equivalent_to() or ""))
        all_converged &= sol.converged

    os.makedirs(out_dir, exist_ok=True)
    meta = {"tool_version": __version__, "overlap": overlap,
            "seed": scenario_doc.get("meta", {}).get("seed"),
            "config_hash": scenario_doc.get("meta", {}).get("config_hash")}
    io.write_csv(os.path.join(out_dir, "sweep.csv"),
                 ("offset_db", "lam", "g1", "g2", "step", "converged", "equivalent"),
                 rows, meta=meta)
    ranked = sorted(rows, key=lambda r: r[1], reverse=True)[:3]
    summary = {"top3": [{"offset_db": r[0], "lambda": r[1]} for r in ranked], "meta": meta}
    io.write_json(summary, os.path.join(out_dir, "summary.json"))
    click.echo("top3: " + ", ".join(f"{r['offset_db']:g} dB (lambda={r['lambda']:.6g})"
                                    for r in summary["top3"]))
    return EXIT_OK if all_converged else EXIT_NOT_CONVERGED


@cli.command("montecarlo")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--trials", required=True, type=int)
@click.option("--seed-base", required=True, type=int)
@click.option("--workers", type=int, default=None,
              help="Parallel trial workers (default: FLEXLINK_WORKERS or 1).")
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_montecarlo(config_path, trials, seed_base, workers, out_dir):
    """Seeded Monte Carlo policy study: offset sweep, overlap arms, PF baseline."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    config = io.load_config(config_path)
    study = experiments.run_policy_study(config, trials, seed_base, workers=workers)

    os.makedirs(out_dir, exist_ok=True)
    meta = {"tool_version": __version__, "seed_base": seed_base, "trials": trials,
            "config_hash": io.canonical_hash(io.config_to_dict(config))}
    rows = []
    for t, res in enumerate(study["trials"]):
        for off, cell in sorted(res["partial"].items(), key=lambda kv: float(kv[0])):
            rows.append((t, res["seed"], off, cell["lam"], cell["lam_ul"], cell["lam_dl"],
                         cell["step"], int(cell["converged"])))
    io.write_csv(os.path.join(out_dir, "trials.csv"),
                 ("trial", "seed", "offset_db", "lam", "lam_ul", "lam_dl", "step", "converged"),
                 rows, meta=meta)
    io.write_json({"aggregate": study["aggregate"], "config": study["config"], "meta": meta},
                  os.path.join(out_dir, "summary.json"))
    agg = study["aggregate"]
    click.echo(f"mean lambda: best={agg['mean_best']:.6g} coud={agg['mean_coud']:.6g} "
               f"ratio={agg['best_over_coud']:.3f}")
    return EXIT_OK


@cli.command("compare-pf")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--policy", "policy_text", required=True)
@click.option("--split", default="9:16", show_default=True,
              help="UL:DL resource block split for the PF baseline.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_compare_pf(scenario_path, policy_text, split, out_dir):
    """Joint optimizer versus the QoS-based proportional fairness baseline."""
    with open(scenario_path) as fh:
        scenario_doc = json.load(fh)
    scenario = io.scenario_from_dict(scenario_doc)
    policy = Policy.parse(policy_text)
    try:
        ul_rbs, dl_rbs = (int(x) for x in split.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad split {split!r}, expected UL:DL") from exc

    result = experiments.compare_pf(scenario, policy, split=(ul_rbs, dl_rbs))

    os.makedirs(out_dir, exist_ok=True)
    meta = {"tool_version": __version__, "policy": policy.label,
            "seed": scenario_doc.get("meta", {}).get("seed"),
            "config_hash": scenario_doc.get("meta", {}).get("config_hash")}
    opt, pf = result["optimizer"], result["pf"]
    io.write_csv(os.path.join(out_dir, "compare_pf.csv"),
                 ("algorithm", "lam_min_direction", "lam_ul", "lam_dl"),
                 [("joint", min(opt["lam_ul"], opt["lam_dl"]), opt["lam_ul"], opt["lam_dl"]),
                  ("pf", pf["lambda_min_direction"], pf["lambda_ul"], pf["lambda_dl"])],
                 meta=meta)
    click.echo(f"joint lambda={opt['lam']:.6g}  pf min-direction="
               f"{pf['lambda_min_direction']:.6g}")
    return EXIT_OK if opt["converged"] else EXIT_NOT_CONVERGED


@cli.command("minimize-power")
@click.option("--solution", "solution_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_minimize_power(solution_path, out_dir):
    """Shrink a strictly feasible solution's power to the utility-1 minimum."""
    with open(solution_path) as fh:
        doc = json.load(fh)
    scenario = io.scenario_from_dict(doc["scenario"])
    from .model import Association

    assoc = Association(b_ul=np.array(doc["association"]["b_ul"]),
                        b_dl=np.array(doc["association"]["b_dl"]),
                        n_bs=doc["association"]["n_bs"])
    theta = float(doc["solution"].get("theta", 1.0))
    problem = Problem.from_scenario(scenario, assoc, theta=theta)
    w_star = np.array(doc["solution"]["w"], dtype=float)
    p_star = np.array(doc["solution"]["p"], dtype=float)

    result = minimize_power(problem, w_star, p_star)

    os.makedirs(out_dir, exist_ok=True)
    out = {
        "p_min": result.p_min.tolist(),
        "lambda": result.lam,
        "psi_before": result.psi_before,
        "psi_after": result.psi_after,
        "saving_ratio": result.saving_ratio,
        "meta": {"tool_version": __version__,
                 "scenario_hash": io.canonical_hash(doc["scenario"]),
                 "seed": doc.get("meta", {}).get("seed"),
                 "config_hash": doc.get("meta", {}).get("config_hash")},
    }
    io.write_json(out, os.path.join(out_dir, "minpower.json"))
    click.echo(f"lambda={result.lam:.6g} saving_ratio={result.saving_ratio:.4f}")
    return EXIT_OK if result.fixed_point.converged else EXIT_NOT_CONVERGED


def main(argv=None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except (ConfigError, ModelError, InfeasibleError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    return int(rv) if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
