"""Operator command line: bank checks, cohort generation, training,
evaluation, scripted simulation, serving, and a thin HTTP session client.

Every subcommand is a thin wrapper over the library and supports ``--json``
for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bank import QuestionType, load_bank, load_default_bank
from .cohort import (
    bin_count_label,
    export_cohort,
    generate_cohort,
    load_cohort_file,
    sample_persona,
)
from .errors import RiskProfilerError
from .mlp import (
    LABEL_ORDER,
    Mlp,
    TrainConfig,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .scoring import LatencyModel, LeadershipInputs, compute_result, result_to_json
from .seeds import derive_seed
from .session import SessionState, current_question, start_session, submit_answer


def _load_bank_path(path: str | None):
    if path is None:
        return load_default_bank()
    p = Path(path)
    with open(p, "rb") as fh:
        return load_bank(fh, fmt="json" if p.suffix == ".json" else "lines")


def _emit(args, payload: dict, plain: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(plain)


def cmd_bank_validate(args) -> int:
    try:
        bank = _load_bank_path(args.file)
    except RiskProfilerError as exc:
        _emit(args, {"valid": False, "error": str(exc)}, f"invalid: {exc}")
        return 1
    counts = {t.value: len(bank.by_type[t]) for t in QuestionType}
    _emit(
        args,
        {"valid": True, "total": len(bank), "per_type": counts},
        f"ok: {len(bank)} questions " + " ".join(f"{k}={v}" for k, v in counts.items()),
    )
    return 0


def cmd_cohort_gen(args) -> int:
    bank = _load_bank_path(args.bank)
    cohort = generate_cohort(args.n, noise=args.noise, seed=args.seed, bank=bank)
    export_cohort(cohort, args.out)
    counts = {d.value: c for d, c in cohort.class_counts().items()}
    _emit(
        args,
        {"rows": args.n, "noise": args.noise, "seed": args.seed,
         "out": str(args.out), "class_counts": counts},
        f"wrote {args.n} rows to {args.out} (classes: {counts})",
    )
    return 0


def parse_train_config(path: str | None) -> tuple[TrainConfig, list[int], str]:
    """Key-value config file -> (TrainConfig, hidden sizes, activation).

    Recognized keys: learning_rate, max_epochs, patience, split (three
    comma-separated fractions), seed, hidden (comma-separated sizes),
    activation. ``#`` lines are comments.
    """
    values: dict[str, str] = {}
    if path is not None:
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line is not 'key = value': {raw!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    cfg = TrainConfig(
        learning_rate=float(values.get("learning_rate", 0.05)),
        max_epochs=int(values.get("max_epochs", 500)),
        patience=int(values.get("patience", 20)),
        split=tuple(float(x) for x in values.get("split", "0.70,0.15,0.15").split(",")),  # type: ignore[arg-type]
        seed=int(values.get("seed", 0)),
    )
    hidden = [int(x) for x in values.get("hidden", "32,32").split(",") if x.strip()]
    activation = values.get("activation", "sigmoid")
    return cfg, hidden, activation


def _metrics_dict(metrics) -> dict:
    return {
        "accuracy": metrics.accuracy,
        "precision": {d.value: metrics.precision[d] for d in LABEL_ORDER},
        "macro_f1": metrics.macro_f1,
        "confusion": metrics.confusion.tolist(),
    }


def cmd_train(args) -> int:
    dataset, _ = load_cohort_file(args.cohort)
    cfg, hidden, activation = parse_train_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    net = Mlp.create([dataset.features.shape[1], *hidden, 3],
                     activation=activation, seed=cfg.seed)
    report = train(net, dataset, cfg)

    if not args.json:
        for epoch, (tr, va) in enumerate(zip(report.train_mse, report.val_mse), start=1):
            print(f"epoch {epoch:4d}  train_mse {tr:.6f}  val_mse {va:.6f}")
    metrics = evaluate(net, dataset.features[report.test_indices],
                       dataset.labels[report.test_indices])
    if args.out_checkpoint:
        save_checkpoint(net, args.out_checkpoint, seed=cfg.seed)
    payload = {
        "epochs_run": report.epochs_run,
        "stop_reason": report.stop_reason,
        "best_epoch": report.best_epoch,
        "train_mse": report.train_mse,
        "val_mse": report.val_mse,
        "test_metrics": _metrics_dict(metrics),
        "checkpoint": args.out_checkpoint,
    }
    plain = (
        f"stopped after {report.epochs_run} epochs ({report.stop_reason}), "
        f"best epoch {report.best_epoch}\n"
        f"test accuracy {metrics.accuracy:.4f}  macro-F1 {metrics.macro_f1:.4f}"
        + (f"\ncheckpoint written to {args.out_checkpoint}" if args.out_checkpoint else "")
    )
    _emit(args, payload, plain)
    return 0


def cmd_eval(args) -> int:
    net, _ = load_checkpoint(args.checkpoint)
    dataset, _ = load_cohort_file(args.cohort)
    metrics = evaluate(net, dataset.features, dataset.labels)
    payload = {"metrics": _metrics_dict(metrics), "rows": len(dataset)}
    plain = (
        f"rows {len(dataset)}  accuracy {metrics.accuracy:.4f}  "
        f"macro-F1 {metrics.macro_f1:.4f}\nconfusion {metrics.confusion.tolist()}"
    )
    _emit(args, payload, plain)
    return 0


def cmd_simulate(args) -> int:
    from .cohort import simulate_answer

    bank = _load_bank_path(args.bank)
    persona = sample_persona(np.random.default_rng(args.persona_seed), noise=args.noise)
    seed = derive_seed(args.persona_seed, "sim")
    answer_rng = np.random.default_rng(derive_seed(seed, "session-draws"))
    emotion_seed = derive_seed(seed, "emotion")

    # drive the real engine question by question; disqualified emotions may
    # append revalidation questions, which get answered the same way
    session = start_session("simulated", bank, seed=seed)
    clock = 0
    while session.state is SessionState.ACTIVE:
        question = current_question(session)
        reaction = simulate_answer(persona, question, answer_rng, emotion_seed)
        submit_answer(
            session,
            answer=reaction.answer,
            displayed_at=clock,
            answered_at=clock + reaction.latency_ms,
            emotion=reaction.emotion,
        )
        clock += reaction.latency_ms

    if session.state is SessionState.INVALID:
        _emit(args, {"state": "Invalid"}, "session invalidated (revalidation budget)")
        return 1
    bundle = compute_result(
        session,
        LeadershipInputs(education_level=args.education, job_level=args.job),
        LatencyModel(),
    )
    doc = result_to_json(bundle)
    if args.json:
        print(doc)
    else:
        print(f"persona label: {persona.label.value}  bin-count oracle: "
              f"{bin_count_label(session.records).value}")
        print(doc)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import Settings, create_app

    host, _, port = args.addr.partition(":")
    settings = Settings(
        data_dir=Path(args.data_dir),
        bank_path=Path(args.bank) if args.bank else None,
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    uvicorn.run(create_app(settings), host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def cmd_session_run(args) -> int:
    """Thin client: complete one scripted session against a running service."""
    import httpx

    base = args.base_url.rstrip("/")
    with httpx.Client(base_url=base, timeout=30.0) as client:
        created = client.post(
            "/v1/users",
            json={"username": args.username, "education_level": args.education,
                  "job_level": args.job},
        )
        if created.status_code == 409:
            print("username exists; re-run with a fresh --username", file=sys.stderr)
            return 1
        created.raise_for_status()
        token = created.json()["token"]
        headers = {"Authorization": f"Bearer {token}"}

        started = client.post(
            "/v1/sessions",
            json={"username": args.username, "nonce": args.nonce},
            headers=headers,
        )
        started.raise_for_status()
        session_id = started.json()["session_id"]

        rng = np.random.default_rng(args.answer_seed)
        clock = int(time.time() * 1000)
        while True:
            q = client.get(f"/v1/sessions/{session_id}/question", headers=headers)
            if q.status_code == 409:
                break
            q.raise_for_status()
            latency = int(rng.integers(1200, 4200))
            answer = "Yes" if rng.random() < 0.5 else "No"
            body = {
                "answer": answer,
                "displayed_at": clock,
                "answered_at": clock + latency,
                "emotion": {"valence": round(float(rng.uniform(-0.4, 0.6)), 3),
                            "arousal": round(float(rng.uniform(-0.4, 0.6)), 3),
                            "confidence": 0.95},
            }
            clock += latency
            reply = client.post(
                f"/v1/sessions/{session_id}/answer", json=body, headers=headers
            )
            reply.raise_for_status()
            if reply.json()["state"] != "Active":
                break

        result = client.get(f"/v1/sessions/{session_id}/result", headers=headers)
        result.raise_for_status()
        print(json.dumps(result.json(), sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskprofiler")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    bank = sub.add_parser("bank", help="question bank utilities")
    bank_sub = bank.add_subparsers(dest="bank_command", required=True)
    validate = bank_sub.add_parser("validate", help="validate a bank file")
    validate.add_argument("file", nargs="?", default=None,
                          help="bank file (defaults to the packaged bank)")
    validate.add_argument("--json", action="store_true")
    validate.set_defaults(func=cmd_bank_validate)

    cohort = sub.add_parser("cohort", help="synthetic cohort utilities")
    cohort_sub = cohort.add_subparsers(dest="cohort_command", required=True)
    gen = cohort_sub.add_parser("gen", help="generate a labeled cohort export")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--noise", type=float, default=0.1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--bank", default=None)
    gen.add_argument("--json", action="store_true")
    gen.set_defaults(func=cmd_cohort_gen)

    tr = sub.add_parser("train", help="train the risk-profile network on a cohort")
    tr.add_argument("--cohort", required=True)
    tr.add_argument("--config", default=None, help="key = value training config file")
    tr.add_argument("--seed", type=int, default=None, help="override the config seed")
    tr.add_argument("--out-checkpoint", default=None)
    tr.add_argument("--json", action="store_true")
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="evaluate a checkpoint on a cohort")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--cohort", required=True)
    ev.add_argument("--json", action="store_true")
    ev.set_defaults(func=cmd_eval)

    sim = sub.add_parser("simulate", help="run one synthetic session end to end")
    sim.add_argument("--persona-seed", type=int, required=True)
    sim.add_argument("--bank", default=None)
    sim.add_argument("--noise", type=float, default=0.1)
    sim.add_argument("--education", type=int, default=3)
    sim.add_argument("--job", type=int, default=3)
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--addr", default="127.0.0.1:8000")
    srv.add_argument("--data-dir", default="./data")
    srv.add_argument("--bank", default=None)
    srv.add_argument("--static-dir", default=None)
    srv.set_defaults(func=cmd_serve)

    run = sub.add_parser("session", help="HTTP client utilities")
    run_sub = run.add_subparsers(dest="session_command", required=True)
    sr = run_sub.add_parser("run", help="complete one scripted session over HTTP")
    sr.add_argument("--base-url", default="http://127.0.0.1:8000")
    sr.add_argument("--username", required=True)
    sr.add_argument("--nonce", default=None)
    sr.add_argument("--answer-seed", type=int, default=0)
    sr.add_argument("--education", type=int, default=3)
    sr.add_argument("--job", type=int, default=3)
    sr.set_defaults(func=cmd_session_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RiskProfilerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
