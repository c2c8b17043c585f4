"""Command-line surface: construct, encode, decode, simulate, attack, verify, report.

Experiments are driven by a single JSON config document; every stochastic
output is pinned byte-for-byte by the config seed (the secure-randomness
encode path is deliberately excluded from determinism).

Exit codes: 0 success, 2 config error, 3 constraint violation, 4 resource
guard tripped.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bitio
from .channel import (
    SymmetricChannel,
    capacity,
    channel_from_descriptor,
    descriptor_hash,
)
from .construction import (
    BitChannelQuality,
    EnumerationGuardError,
    evolve_bec,
    evolve_quantized,
)
from .evaluation import (
    CSV_HEADER,
    attack_trial,
    reliability_trial,
    run_verification_suite,
    secrecy_report,
)
from .wiretap import SeededBits, WiretapCodeSpec, build_spec, decode, encode

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSTRAINT = 3
EXIT_GUARD = 4


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    """Parsed experiment description (see README for the JSON schema)."""

    main: dict
    wiretap: dict
    m: int
    beta: float
    scheme: str = "weak"
    delta_n: float | str | None = None
    mu: int = 256
    trials: int = 10000
    seed: int = 0
    priors: tuple = ("uniform", "point_mass", "skewed")
    sweep: tuple = ()
    workers: int | None = None
    out_dir: str = "."
    decoder: str = "sc"
    max_paths: int | None = None
    c1: float = 1.0
    c2: float = 0.01

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as ex:
            raise ConfigError(f"cannot read config {path}: {ex}") from ex
        try:
            return cls(
                main=doc["main"],
                wiretap=doc["wiretap"],
                m=int(doc["m"]),
                beta=float(doc["beta"]),
                scheme=doc.get("scheme", "weak"),
                delta_n=doc.get("delta_n"),
                mu=int(doc.get("mu", 256)),
                trials=int(doc.get("trials", 10000)),
                seed=int(doc.get("seed", 0)),
                priors=tuple(doc.get("priors", ["uniform", "point_mass", "skewed"])),
                sweep=tuple(doc.get("sweep", [])),
                workers=doc.get("workers"),
                out_dir=doc.get("out_dir", "."),
                decoder=doc.get("decoder", "sc"),
                max_paths=doc.get("max_paths"),
                c1=float(doc.get("c1", 1.0)),
                c2=float(doc.get("c2", 0.01)),
            )
        except (KeyError, TypeError, ValueError) as ex:
            raise ConfigError(f"bad config {path}: {ex}") from ex

    def resolve_delta(self) -> tuple[float | None, float | None]:
        """(delta_n, log2_delta_n) with the "2^-n^beta" literal resolved."""
        if self.delta_n is None:
            return None, None
        if isinstance(self.delta_n, str):
            if self.delta_n.strip() != "2^-n^beta":
                raise ConfigError(f"unknown delta_n literal {self.delta_n!r}")
            return None, -float(1 << self.m) ** self.beta
        return float(self.delta_n), None


def _quality(ch: SymmetricChannel, desc: dict, m: int, mu: int, cache_dir: Path) -> BitChannelQuality:
    """Evolve (or load from cache) the per-index quality table for one channel."""
    key = f"{descriptor_hash(desc)}_m{m}_mu{mu}"
    cache = cache_dir / f"quality_{key}.npz"
    if cache.exists():
        return BitChannelQuality.load(cache)
    if desc.get("kind") == "bec":
        q = evolve_bec(float(desc["param"]), m)
    else:
        q = evolve_quantized(ch, m, mu=mu)
    cache_dir.mkdir(parents=True, exist_ok=True)
    q.save(cache)
    return q


def _load_spec_and_tables(cfg: ExperimentConfig):
    main = channel_from_descriptor(cfg.main)
    wire = channel_from_descriptor(cfg.wiretap)
    out = Path(cfg.out_dir)
    q_main = _quality(main, cfg.main, cfg.m, cfg.mu, out / "cache")
    q_wire = _quality(wire, cfg.wiretap, cfg.m, cfg.mu, out / "cache")
    delta, l2delta = cfg.resolve_delta()
    spec = build_spec(
        q_main,
        q_wire,
        beta=cfg.beta,
        scheme=cfg.scheme,
        delta_n=delta,
        log2_delta_n=l2delta,
        c1=cfg.c1,
        c2=cfg.c2,
        binding={"main": cfg.main, "wiretap": cfg.wiretap, "m": cfg.m, "mu": cfg.mu},
    )
    return main, wire, q_main, q_wire, spec


def cmd_construct(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    main, wire, q_main, q_wire, spec = _load_spec_and_tables(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec_path = out / "spec.json"
    spec_path.write_text(spec.to_json())
    q_main.to_csv(out / "quality_main.csv")
    q_wire.to_csv(out / "quality_wiretap.csv")
    print(f"n = {spec.n}, scheme = {spec.scheme}")
    print(f"|R| = {spec.r}, |A| = {spec.k}, |B| = {spec.b_set.size}, "
          f"|X| = {spec.x_set.size}, |Y| = {spec.y_set.size}")
    print(f"rate = {spec.rate:.6f}")
    if spec.k == 0:
        print("warning: zero-rate spec (no index is reliable for the main channel "
              "but unreliable for the wiretap channel)")
    print(f"spec written to {spec_path}")
    return EXIT_OK


def cmd_encode(args) -> int:
    spec = WiretapCodeSpec.from_json(Path(args.spec).read_text())
    payload = Path(args.infile).read_bytes()
    bits = bitio.unpack_bits(payload)
    if spec.k == 0 and bits.size:
        raise ValueError("the spec carries no message bits (k = 0); only empty input encodes")
    if bits.size % max(spec.k, 1):
        raise ValueError(f"input must be a multiple of k = {spec.k} bits, got {bits.size}")
    if args.insecure_seed is not None:
        if not args.allow_insecure_seed:
            raise ConfigError("--insecure-seed requires --allow-insecure-seed "
                              "(test use only: a seeded randomizer voids the security claims)")
        rng = SeededBits(args.insecure_seed)
    else:
        rng = None
    blocks = bits.reshape(-1, spec.k) if spec.k else np.zeros((0, 0), dtype=np.uint8)
    frame = encode(spec, blocks, rng=rng)
    Path(args.outfile).write_bytes(bitio.pack_bits(frame.x.reshape(-1)))
    print(f"encoded {blocks.shape[0]} block(s) of {spec.k} bits into {blocks.shape[0]} x {spec.n} codeword bits")
    return EXIT_OK


def cmd_decode(args) -> int:
    spec = WiretapCodeSpec.from_json(Path(args.spec).read_text())
    main = channel_from_descriptor(json.loads(args.channel))
    symbols = bitio.unpack_symbols(Path(args.infile).read_bytes())
    if symbols.size % spec.n:
        raise ValueError(f"input must be a multiple of n = {spec.n} symbols, got {symbols.size}")
    y = symbols.reshape(-1, spec.n)
    u_hat = decode(spec, y, main, strategy=args.strategy, max_paths=args.max_paths)
    Path(args.outfile).write_bytes(bitio.pack_bits(u_hat.reshape(-1)))
    print(f"decoded {y.shape[0]} block(s)")
    return EXIT_OK


def _parallel_reliability(cfg, spec, main, q_main):
    """Chunked Monte Carlo, deterministic for a given seed regardless of worker count."""
    import multiprocessing as mp

    chunks = 32
    per = [cfg.trials // chunks + (1 if i < cfg.trials % chunks else 0) for i in range(chunks)]
    seeds = np.random.SeedSequence(cfg.seed).spawn(chunks)
    jobs = [
        (spec, main, q_main, n_i, seed, cfg.priors, cfg.decoder, cfg.max_paths)
        for n_i, seed in zip(per, seeds)
        if n_i
    ]
    workers = cfg.workers or mp.cpu_count()
    if workers > 1 and len(jobs) > 1:
        with mp.get_context("spawn").Pool(min(workers, len(jobs))) as pool:
            parts = pool.starmap(_reliability_chunk, jobs)
    else:
        parts = [_reliability_chunk(*j) for j in jobs]
    from .evaluation import TrialResult, clopper_pearson_upper

    out = []
    free_bound = parts[0][1]
    for p in cfg.priors:
        errors = sum(part[0][p] for part in parts)
        ucl = clopper_pearson_upper(errors, cfg.trials)
        out.append(
            TrialResult(
                prior=p,
                trials=cfg.trials,
                errors=errors,
                fer=errors / cfg.trials,
                upper_confidence=ucl,
                bound=free_bound,
                passed=ucl <= free_bound + 1e-6,
            )
        )
    return out


def _reliability_chunk(spec, main, q_main, trials, seed, priors, decoder, max_paths):
    results = reliability_trial(
        spec,
        main,
        q_main,
        trials,
        np.random.default_rng(seed),
        priors=priors,
        strategy=decoder,
        max_paths=max_paths,
    )
    return {r.prior: r.errors for r in results}, results[0].bound


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    main, wire, q_main, q_wire, spec = _load_spec_and_tables(cfg)
    results = _parallel_reliability(cfg, spec, main, q_main)
    doc = {
        "n": spec.n,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "results": [vars(r) for r in results],
    }
    text = json.dumps(doc, indent=1)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def cmd_attack(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    main, wire, q_main, q_wire, spec = _load_spec_and_tables(cfg)
    res = attack_trial(spec, wire, q_wire, cfg.trials, np.random.default_rng(cfg.seed))
    doc = vars(res)
    text = json.dumps(doc, indent=1)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    ok = run_verification_suite(verbose=True)
    print("verification suite:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else 1


def cmd_report(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    params = cfg.sweep or [cfg.wiretap.get("param")]
    rows = [CSV_HEADER]
    for p in params:
        wire_desc = dict(cfg.wiretap)
        if p is not None:
            wire_desc["param"] = p
            wire_desc.pop("label", None)
        sub = ExperimentConfig(**{**vars(cfg), "wiretap": wire_desc})
        main, wire, q_main, q_wire, spec = _load_spec_and_tables(sub)
        rep = secrecy_report(spec, main, wire, q_main, q_wire)
        rows.append(rep.csv_row(p if p is not None else float("nan")))
        print(f"p2 = {p}: rate = {rep.rate.value:.4f}, "
              f"Cs = {rep.secrecy_capacity.value:.4f} "
              f"({100 * rep.rate.value / rep.secrecy_capacity.value if rep.secrecy_capacity.value else 0.0:.1f}%), "
              f"|X| = {rep.set_sizes['X']}")
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"table written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wiretap-polar",
        description="Wiretap polar coding: construction, coding, simulation, reporting.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build quality tables and the code spec from a config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_construct)

    p = sub.add_parser("encode", help="encode packed message bits into codeword bits")
    p.add_argument("--spec", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--insecure-seed", type=int, default=None,
                   help="seed the randomizer deterministically (TEST ONLY)")
    p.add_argument("--allow-insecure-seed", action="store_true")
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="decode packed received symbols into message bits")
    p.add_argument("--spec", required=True)
    p.add_argument("--channel", required=True, help="main-channel JSON descriptor")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--strategy", choices=["sc", "multipath"], default="sc")
    p.add_argument("--max-paths", type=int, default=None)
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("simulate", help="Monte Carlo reliability trial against the certified bound")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("attack", help="Monte Carlo genie-aided attack on the randomizer bits")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("verify", help="run the exhaustive small-block verification suites")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("report", help="secrecy-rate table over a sweep of wiretap parameters")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationGuardError as ex:
        print(f"resource guard: {ex}", file=sys.stderr)
        return EXIT_GUARD
    except (ValueError, OSError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
