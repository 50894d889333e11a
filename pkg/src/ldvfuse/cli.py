"""Command line front end: ``ldvfuse {fuse,analyze,simulate,segment,metrics,tta}``.

Exit status is 0 on success, 1 on a runtime failure (a JSON error record is
printed on stderr) and 2 on a configuration error. Outputs are staged next to
their destination and only moved into place once every output of the command
has been written.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import __version__
from .codec import segment_video, simulate_low_delay
from .config import RunConfig, config_from_mapping, load_config, with_overrides
from .enhance import run_variants, trim_analysis
from .ensemble import TtaEnhancer, tta_enhance
from .errors import ConfigError, LdvError
from .fusion import fuse
from .metrics import MetricsReport, loss_report, psnr_sequence
from .vio import encode_y4m, load_y4m, report_to_csv, report_to_json

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class CommandError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class Outputs:
    """Stage files in temporaries; publish all at once, or none."""

    def __init__(self):
        self._staged = []

    def add(self, path, data: bytes) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        self._staged.append((tmp, path))

    def commit(self) -> list:
        done = []
        try:
            for tmp, path in self._staged:
                os.replace(tmp, path)
                done.append(path)
        except OSError:
            for p in done:
                p.unlink(missing_ok=True)
            raise
        finally:
            self.discard()
        return done

    def discard(self) -> None:
        for tmp, _ in self._staged:
            Path(tmp).unlink(missing_ok=True)
        self._staged = []


def _read_video(path, role):
    if not path:
        raise CommandError(f"{role}-missing", f"no --{role} given")
    if not Path(path).is_file():
        raise CommandError(f"{role}-not-found", f"{role} file {path} does not exist")
    return load_y4m(path)


def _need_output(cfg):
    if not cfg.output:
        raise CommandError("output-missing", "no --output given")
    return Path(cfg.output)


def _render(report: MetricsReport, fmt: str | None, summary: bool = True) -> bytes:
    fmt = fmt or "json"
    text = report_to_csv(report, include_summary=summary) if fmt == "csv" else report_to_json(report)
    return text.encode()


def _report_path(cfg: RunConfig, video_out: Path) -> Path:
    if cfg.report_path:
        return Path(cfg.report_path)
    return video_out.with_name(f"{video_out.stem}.report.{cfg.report or 'json'}")


def _maybe_tta(enhancer, cfg):
    if cfg.tta_enabled:
        return TtaEnhancer(enhancer, cfg.tta_config(), cfg.threads)
    return enhancer


def _config_echo(cfg: RunConfig) -> dict:
    fc = cfg.fusion_config()
    h = fc.heuristic
    return {
        "tau": h.tau, "m_slow": h.m_slow, "m_fast": h.m_fast, "fps_cutoff": h.fps_cutoff,
        "normalize_per_pixel": h.normalize_per_pixel,
        "slow_motion_when_gradient_at_least_tau": h.slow_motion_when_gradient_at_least_tau,
        "short_len": fc.short_len, "intra_len": fc.intra_len, "head_len": fc.head_len,
    }


# --- commands ------------------------------------------------------------


def cmd_fuse(cfg: RunConfig, out: Outputs) -> None:
    seq = _read_video(cfg.input, "input")
    dest = _need_output(cfg)
    fcfg = cfg.fusion_config()
    main = _maybe_tta(cfg.enhancer("main"), cfg)
    intra = _maybe_tta(cfg.enhancer("intra"), cfg)
    variants = run_variants(seq, main, intra, fcfg, cfg.threads)
    fused, decision, plan = fuse(seq, variants, fcfg)
    report = MetricsReport(
        series={"source": [s.value for s in plan.sources]},
        aggregates=decision.as_dict(),
        metadata={
            "command": "fuse", "video": seq.name, "frame_count": len(seq),
            "fps": seq.fps, "config": _config_echo(cfg),
            "enhancers": {"main": main.name, "intra": intra.name},
            "variant_lengths": {"full": len(variants.full), "short": len(variants.short),
                                "intra": len(variants.intra)},
            "plan": plan.summary(),
        },
    )
    out.add(dest, encode_y4m(fused))
    out.add(_report_path(cfg, dest), _render(report, cfg.report))


def cmd_tta(cfg: RunConfig, out: Outputs) -> None:
    seq = _read_video(cfg.input, "input")
    dest = _need_output(cfg)
    enhancer = cfg.enhancer("main")
    diag = {}
    result = tta_enhance(seq, enhancer, cfg.tta_config(), cfg.threads, diag)
    report = MetricsReport(metadata={"command": "tta", "video": seq.name,
                                     "frame_count": len(seq), "enhancer": enhancer.name, **diag})
    if cfg.gt:
        report.merge(psnr_sequence(result, _read_video(cfg.gt, "gt")))
    out.add(dest, encode_y4m(result))
    out.add(_report_path(cfg, dest), _render(report, cfg.report))


def cmd_analyze(cfg: RunConfig, out: Outputs) -> None:
    seq = _read_video(cfg.input, "input")
    gt = _read_video(cfg.gt, "gt")
    dest = _need_output(cfg)
    report = trim_analysis(seq, gt, cfg.enhancer("main"), cfg.trim_config(), cfg.threads)
    report.metadata["command"] = "analyze"
    out.add(dest, _render(report, cfg.report or "csv", summary=False))


def cmd_simulate(cfg: RunConfig, out: Outputs) -> None:
    seq = _read_video(cfg.input, "input")
    dest = _need_output(cfg)
    prof = cfg.degradation_profile()
    gop = cfg.gop_config()
    degraded = simulate_low_delay(seq, gop, prof, cfg.seed, cfg.threads)
    out.add(dest, encode_y4m(degraded))
    if cfg.report_path:
        report = psnr_sequence(degraded, seq)
        report.metadata.update(command="simulate", gop_size=gop.gop_size,
                               intra_step=prof.intra_step, level_steps=prof.level_steps)
        out.add(cfg.report_path, _render(report, cfg.report))


def cmd_segment(cfg: RunConfig, out: Outputs) -> None:
    seq = _read_video(cfg.input, "input")
    dest = _need_output(cfg)
    stem = Path(cfg.input).stem
    for i, part in enumerate(segment_video(seq, cfg.segment_len)):
        out.add(dest / f"{stem}_seg{i:03d}.y4m", encode_y4m(part))


def cmd_metrics(cfg: RunConfig, out: Outputs) -> None:
    seq = _read_video(cfg.input, "input")
    gt = _read_video(cfg.gt, "gt")
    report = psnr_sequence(seq, gt)
    report.merge(loss_report(seq, gt, cfg.loss_weights()))
    report.metadata["command"] = "metrics"
    data = _render(report, cfg.report)
    if cfg.output:
        out.add(cfg.output, data)
    else:
        sys.stdout.write(data.decode())


COMMANDS = {
    "fuse": cmd_fuse,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "segment": cmd_segment,
    "metrics": cmd_metrics,
    "tta": cmd_tta,
}


# --- argument handling -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input")
    common.add_argument("--gt")
    common.add_argument("--output")
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--report", choices=("csv", "json"))
    common.add_argument("--report-path")
    common.add_argument("--threads", type=int)
    common.add_argument("--tau", type=float)
    common.add_argument("--short-len", type=int)
    common.add_argument("--intra-len", type=int)
    common.add_argument("--head-len", type=int)
    common.add_argument("--invert-heuristic", action="store_true",
                        help="route frame 0 to SHORT when the gradient is below tau")
    common.add_argument("--enhancer", help="main enhancer: identity | smooth[:R[:S]] | external:CMD")
    common.add_argument("--intra-enhancer", help="intra-frame enhancer, same syntax")
    common.add_argument("--tta", action="store_true", help="run enhancers under 8-way TTA (fuse)")
    common.add_argument("--segment-len", type=int)
    common.add_argument("--intra-step", type=float)
    common.add_argument("--inter-step", type=float)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="ldvfuse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else config_from_mapping({})
    top = {k: getattr(args, k) for k in ("input", "gt", "output", "report", "report_path", "threads")}
    cfg = replace(cfg, **{k: v for k, v in top.items() if v is not None})
    if cfg.threads < 1:
        raise ConfigError("threads must be a positive integer")
    cfg = with_overrides(
        cfg,
        heuristic={"tau": args.tau,
                   "slow_motion_when_gradient_at_least_tau": False if args.invert_heuristic else None},
        fusion={"short_len": args.short_len, "intra_len": args.intra_len, "head_len": args.head_len},
        enhancers={"main": args.enhancer, "intra": args.intra_enhancer},
        tta={"enabled": True if args.tta else None},
        segment={"length": args.segment_len},
        degradation={"intra_step": args.intra_step, "inter_step": args.inter_step, "seed": args.seed},
    )
    if args.inter_step is not None:
        cfg.degradation.pop("level_steps", None)
    # surface config errors before any work starts
    cfg.fusion_config(), cfg.tta_config(), cfg.trim_config(), cfg.loss_weights()
    cfg.degradation_profile(), cfg.enhancer("main"), cfg.enhancer("intra")
    return cfg


def _error_record(command, code, message):
    json.dump({"command": command, "error": code, "message": message}, sys.stderr)
    sys.stderr.write("\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        _error_record(args.command, exc.code, str(exc))
        return EXIT_CONFIG
    out = Outputs()
    try:
        COMMANDS[args.command](cfg, out)
        out.commit()
    except ConfigError as exc:
        out.discard()
        _error_record(args.command, exc.code, str(exc))
        return EXIT_CONFIG
    except CommandError as exc:
        out.discard()
        _error_record(args.command, exc.code, str(exc))
        return EXIT_RUNTIME
    except LdvError as exc:
        out.discard()
        _error_record(args.command, exc.code, str(exc))
        return EXIT_RUNTIME
    except OSError as exc:
        out.discard()
        _error_record(args.command, "io-error", str(exc))
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
