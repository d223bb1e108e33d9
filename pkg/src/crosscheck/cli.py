"""Command-line entry points: verify, serve, eval, synth.

Exit codes are part of the contract: 0 success, 1 validation error (bad
flags or inputs), 2 backend or transport failure, 3 internal error. The
summary table goes to standard output; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import logging
import os
import socket
import sys

from . import evaluation
from .core import VerificationResult, verify_generation
from .errors import (
    BackendError,
    CrosscheckError,
    UndefinedMetricError,
    ValidationError,
)
from .gateway import (
    GENERATOR_URL_VAR,
    NLI_URL_VAR,
    QA_URL_VAR,
    TASK_URL_VAR,
    BackendConfig,
    FixtureBackend,
    Gateway,
    HttpBackend,
    load_fixture,
)
from .serialization import annotation_to_dict, canonical_json, result_to_dict
from .session import SessionManager, SessionStore, build_claim_annotations

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BACKEND = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are validation errors (exit 1), not argparse's default 2.
    def error(self, message):
        raise _UsageError(message)


def _live_config() -> BackendConfig:
    return BackendConfig(
        generator_endpoint=os.environ.get(GENERATOR_URL_VAR, ""),
        nli_endpoint=os.environ.get(NLI_URL_VAR, ""),
        qa_endpoint=os.environ.get(QA_URL_VAR, ""),
        task_endpoint=os.environ.get(TASK_URL_VAR, ""),
    )


def _build_gateway(backend_name: str, fixture_path: str | None) -> Gateway:
    if backend_name == "fixture":
        if not fixture_path:
            raise ValidationError("--fixture PATH is required with the fixture backend")
        return Gateway(FixtureBackend(load_fixture(fixture_path)), BackendConfig())
    config = _live_config()
    return Gateway(HttpBackend(config), config)


def _top_alternative(verification) -> str:
    clusters = sorted(verification.clusters, key=lambda c: -c.size)
    if not clusters:
        return "-"
    top = clusters[0]
    noun = "sample" if top.size == 1 else "samples"
    return f"{top.representative_text} ({top.relation}, {top.size} {noun})"


def format_summary(result: VerificationResult) -> str:
    """Plain-text table: one row per claim with score and top alternative."""
    rows = [("claim", "score", "top alternative")]
    for verification in result.claim_verifications:
        rows.append(
            (
                verification.claim.text,
                f"{verification.consistency_score:.2f}",
                _top_alternative(verification),
            )
        )
    width_claim = max(len(r[0]) for r in rows)
    width_score = max(len(r[1]) for r in rows)
    lines = [
        f"{claim.ljust(width_claim)}  {score.rjust(width_score)}  {top}"
        for claim, score, top in rows
    ]
    return "\n".join(lines) + "\n"


def verify_payload(prompt: str, samples: int, backend_name: str, result) -> dict:
    """Session-shaped payload without volatile fields (ids, timestamps)."""
    annotations, skipped = build_claim_annotations(result)
    return {
        "prompt": prompt,
        "num_samples": samples,
        "backend": backend_name,
        "result": result_to_dict(result),
        "annotations": [annotation_to_dict(a) for a in annotations],
        "skipped_annotations": skipped,
    }


def cmd_verify(args) -> int:
    if args.samples < 2:
        raise ValidationError(
            "--samples must be at least 2 (the presented response plus one sample)"
        )
    gateway = _build_gateway(args.backend, args.fixture)
    result = verify_generation(args.prompt, args.samples, gateway)
    payload = verify_payload(args.prompt, args.samples, args.backend, result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(payload))
    sys.stdout.write(format_summary(result))
    for marker in result.unverified:
        print(
            f"unverified: sentence {marker.sentence_index}"
            + (f" claim {marker.claim_text!r}" if marker.claim_text else "")
            + f" ({marker.reason})",
            file=sys.stderr,
        )
    stats = gateway.stats.as_dict()
    print(f"backend calls: {stats['calls']}", file=sys.stderr)
    print(f"cache hits: {stats['cache_hits']}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    if args.backend == "fixture" and not args.fixture:
        raise ValidationError("--fixture PATH is required with the fixture backend")
    try:
        store = SessionStore(args.store)
    except (ValidationError, OSError) as exc:
        print(f"error: cannot use session store {args.store!r}: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_BACKEND

    def backend_factory(backend_name: str | None):
        name = backend_name or args.backend
        if name == "fixture":
            return FixtureBackend(load_fixture(args.fixture)), BackendConfig()
        config = _live_config()
        return HttpBackend(config), config

    from .service import create_app

    import uvicorn

    app = create_app(SessionManager(store, backend_factory))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _eval_gateway(dataset_path: str) -> Gateway:
    sibling = evaluation.fixture_sibling_path(dataset_path)
    if os.path.exists(sibling):
        return Gateway(FixtureBackend(load_fixture(sibling)), BackendConfig())
    log.warning("no fixture next to %s; using the live backend", dataset_path)
    config = _live_config()
    return Gateway(HttpBackend(config), config)


def cmd_eval(args) -> int:
    if args.samples < 1:
        raise ValidationError("--samples must be at least 1")
    dataset = evaluation.load_dataset(args.dataset)
    gateway = _eval_gateway(args.dataset)
    rows, errors = evaluation.score_dataset(dataset, args.samples, gateway)
    report = evaluation.build_report(rows, errors, n=args.samples)
    if args.sweep:
        report["sweep"] = evaluation.sweep_sample_size(dataset, args.samples, gateway)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(report))
        base, _ = os.path.splitext(args.out)
        evaluation.write_scores_csv(f"{base}.csv", rows)
    counts = report["n_claims"]
    print(
        f"pooled AUROC {report['pooled_auroc']:.4f} "
        f"({counts['S']} supported, {counts['NS']} not supported, "
        f"{report['n_generations']} generations)"
    )
    if args.sweep:
        for point in report["sweep"]:
            print(f"n={point['n']} auroc={point['auroc']:.4f}")
    if errors:
        print(f"{len(errors)} claim(s) failed to score", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    dataset, fixture = evaluation.synthesize_fixture_dataset(
        seed=args.seed,
        n_generations=args.generations,
        s_rate=args.s_rate,
        ns_rate=args.ns_rate,
    )
    evaluation.write_dataset(args.out, dataset)
    fixture_path = evaluation.fixture_sibling_path(args.out)
    evaluation.write_fixture_file(fixture_path, fixture)
    total = sum(len(g.claims) for g in dataset)
    print(
        f"wrote {len(dataset)} generations with {total} labeled claims to "
        f"{args.out} (+ {fixture_path})",
        file=sys.stderr,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crosscheck", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_verify = sub.add_parser("verify", help="verify one response against sampled peers")
    p_verify.add_argument("--prompt", required=True, help="prompt to sample and verify")
    p_verify.add_argument(
        "--samples", type=int, default=20, help="total samples including the presented one"
    )
    p_verify.add_argument("--backend", choices=("live", "fixture"), default="fixture")
    p_verify.add_argument("--fixture", help="fixture file for the fixture backend")
    p_verify.add_argument("--out", help="write the verification payload to this file")
    p_verify.set_defaults(handler=cmd_verify)

    p_serve = sub.add_parser("serve", help="run the verification session API")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--store", required=True, help="directory for session files")
    p_serve.add_argument("--backend", choices=("live", "fixture"), default="fixture")
    p_serve.add_argument("--fixture", help="fixture file for the fixture backend")
    p_serve.set_defaults(handler=cmd_serve)

    p_eval = sub.add_parser("eval", help="score a labeled dataset and report AUROC")
    p_eval.add_argument("--dataset", required=True, help="JSONL dataset path")
    p_eval.add_argument(
        "--samples", type=int, default=20, help="additional samples scored per claim"
    )
    p_eval.add_argument("--sweep", action="store_true", help="add the n=1..N AUROC curve")
    p_eval.add_argument("--out", help="write the JSON report (and a CSV next to it)")
    p_eval.set_defaults(handler=cmd_eval)

    p_synth = sub.add_parser("synth", help="write a synthetic labeled dataset + fixture")
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--generations", type=int, default=50)
    p_synth.add_argument("--s-rate", type=float, default=evaluation.DEFAULT_S_RATE)
    p_synth.add_argument("--ns-rate", type=float, default=evaluation.DEFAULT_NS_RATE)
    p_synth.add_argument("--out", required=True, help="dataset JSONL path")
    p_synth.set_defaults(handler=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValidationError, UndefinedMetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except CrosscheckError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as exc:  # pragma: no cover - safety net
        log.exception("unhandled failure")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
