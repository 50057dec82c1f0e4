"""Command-line entry points.

Subcommands: gen-scene, train, eval, explain, chat, serve, report. Every
command exits 0 on success; domain failures print one machine-readable JSON
error line to stderr and exit 2.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .config import RepoConfig, default_config, load_config
from .errors import ConfigError, XQMapError
from .explain import build_bundle, bundle_to_doc, render_chart
from .jsonutil import canonical_dumps, read_json, write_json
from .llm import STUB, REMOTE, build_prompt, chat as llm_chat, prompt_from_doc, prompt_to_doc
from .scenes import generate_scene, load_scene, observe, save_scene, scenario_config_to_doc
from .training import evaluate, make_env_factory, run_training


def _load_repo_config(args) -> RepoConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_config()


def _scenario_from_args(cfg: RepoConfig, args):
    scenario = cfg.scenario
    if getattr(args, "scenario", None) and args.scenario != scenario.kind:
        # fall back to the named scenario's defaults when the config targets the other one
        from .scenes import GraspConfig, LandConfig

        scenario = GraspConfig() if args.scenario == "grasp" else LandConfig()
    return scenario


def cmd_gen_scene(args) -> int:
    cfg = _load_repo_config(args)
    scenario = _scenario_from_args(cfg, args)
    scene = generate_scene(scenario, args.seed)
    save_scene(scene, args.out)
    print(f"wrote {args.out} ({scene.scenario}, {scene.width}x{scene.height}, "
          f"{len(scene.objects)} objects)")
    return 0


def cmd_train(args) -> int:
    cfg = _load_repo_config(args)
    train_cfg = cfg.train
    if args.mode:
        train_cfg = dataclasses.replace(train_cfg, mode=args.mode)
    if args.steps is not None:
        train_cfg = dataclasses.replace(train_cfg, total_steps=args.steps)
    if args.seed is not None:
        train_cfg = dataclasses.replace(train_cfg, seed=args.seed)
    train_cfg.validate()
    scenario = cfg.scenario
    factory = make_env_factory(scenario)
    started = time.time()
    ckpt = run_training(factory, train_cfg, scenario_config_to_doc(scenario))
    save_checkpoint(ckpt, args.out)
    metrics_path = args.metrics or str(Path(args.out).with_suffix(".metrics.jsonl"))
    with open(metrics_path, "w") as fh:
        for record in ckpt.metrics:
            fh.write(canonical_dumps(record) + "\n")
    print(
        f"trained {train_cfg.mode} ({train_cfg.approximator}) for {train_cfg.total_steps} steps "
        f"/ {len(ckpt.metrics)} episodes in {time.time() - started:.1f}s -> {args.out}"
    )
    print(f"metrics: {metrics_path}")
    return 0


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    scenario_doc = ckpt.config.get("scenario")
    if scenario_doc is None:
        raise ConfigError("checkpoint has no scenario config; cannot rebuild environments")
    from .scenes import scenario_config_from_doc

    factory = make_env_factory(scenario_config_from_doc(scenario_doc))
    result = evaluate(
        ckpt, factory, runs=args.runs, decisions_per_run=args.decisions, seed=args.seed
    )
    print(
        f"correct-choice rate: {100 * result.mean:.2f}% +- {100 * result.std:.2f}% "
        f"over {args.runs} runs ({args.decisions} decisions each)"
    )
    if args.out_dir:
        from .report import plot_eval_rates, write_eval_csv

        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "eval_report.json", result.to_doc())
        write_eval_csv(result, out / "eval_runs.csv")
        plot_eval_rates(result, out / "eval_rates.png")
        print(f"report: {out}/eval_report.json, eval_runs.csv, eval_rates.png")
    return 0


def _parse_pairs(raw: list[str] | None) -> list[tuple[str, str]] | None:
    if not raw:
        return None
    pairs = []
    for item in raw:
        parts = [p.strip() for p in item.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ConfigError(f"--pair expects 'NAME,NAME', got {item!r}")
        pairs.append((parts[0], parts[1]))
    return pairs


def cmd_explain(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    scene = load_scene(args.scene)
    q = ckpt.approximator.predict(observe(scene))
    bundle = build_bundle(q, scene, _parse_pairs(args.pair))
    doc = bundle_to_doc(bundle)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "bundle.json", doc)
    _, svg = render_chart(bundle)
    (out / "chart.svg").write_text(svg, encoding="utf-8")
    texts = [doc["texts"]["shallow"]] + [
        f"{key}: {text}" for key, text in sorted(doc["texts"]["contrastive"].items())
    ]
    (out / "texts.txt").write_text("\n".join(texts) + "\n", encoding="utf-8")
    from .report import plot_candidate_chart, plot_rdx_chart, write_candidates_csv

    write_candidates_csv(doc, out / "candidates.csv")
    plot_candidate_chart(doc, out / "candidates.png")
    if doc["rdx"]:
        plot_rdx_chart(doc, out / "rdx.png")
    print(f"wrote {out}/bundle.json, chart.svg, texts.txt, candidates.csv, candidates.png")
    return 0


def cmd_chat(args) -> int:
    cfg = _load_repo_config(args)
    chat_cfg = cfg.chat
    if args.stub:
        chat_cfg = dataclasses.replace(chat_cfg, mode=STUB)
    if args.remote:
        chat_cfg = dataclasses.replace(chat_cfg, mode=REMOTE)
    if args.timeout is not None:
        chat_cfg = dataclasses.replace(chat_cfg, timeout_s=args.timeout)
    chat_cfg.validate()
    bundle = read_json(args.bundle)
    transcript_path = Path(args.transcript) if args.transcript else None
    if transcript_path and transcript_path.exists():
        prompt = prompt_from_doc(read_json(transcript_path), bundle)
    else:
        prompt = build_prompt(bundle["scenario"], bundle)
    answer, prompt = llm_chat(chat_cfg, prompt, args.question)
    print(answer)
    if transcript_path:
        write_json(transcript_path, prompt_to_doc(prompt))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceSession, create_app

    cfg = _load_repo_config(args)
    ckpt = load_checkpoint(args.checkpoint)
    session = ServiceSession(ckpt, chat_cfg=cfg.chat)
    app = create_app(session, ui_dir=args.ui)
    host = args.host or cfg.service.host
    port = args.port or cfg.service.port
    print(f"serving on http://{host}:{port} (scenario {session.scenario_cfg.kind})")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_report(args) -> int:
    from .report import plot_training_metrics, write_metrics_csv

    records = []
    with open(args.metrics) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(records, out / "metrics.csv")
    figures = plot_training_metrics(records, out)
    print(f"wrote {out}/metrics.csv and {len(figures)} figure(s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xqmap",
        description="Decomposed Q-Map training, explanation and serving on grid scenes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scene", help="generate a scene file")
    p.add_argument("--scenario", choices=["grasp", "land"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen_scene)

    p = sub.add_parser("train", help="train a checkpoint and write metrics")
    p.add_argument("--config")
    p.add_argument("--mode", choices=["decomposed", "monolithic"])
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--metrics")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="greedy correct-choice evaluation")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--decisions", type=int, default=20)
    p.add_argument("--seed", type=int, default=9000)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("explain", help="write an explanation bundle for a scene")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--pair", action="append", help="candidate pair 'Selected,A' (repeatable)")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("chat", help="ask a question about an explanation bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--config")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--stub", action="store_true")
    mode.add_argument("--remote", action="store_true")
    p.add_argument("--timeout", type=float, help="remote request timeout in seconds")
    p.add_argument("--transcript")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("serve", help="serve the inspector HTTP API")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--config")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui", help="directory with the built inspector UI to mount at /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="render training metrics to CSV and figures")
    p.add_argument("--metrics", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except XQMapError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
