"""Command-line frontend.

Subcommands:

* ``poset``   -- build a twisted strata poset and emit DOT / JSON / TSV.
* ``verify``  -- run the exhaustive verification suite over all supported
                 types up to a rank bound (duality, order reversal, the
                 EO/DL equivalence, the w0 identities, twist comparison).
* ``oracle``  -- finite-field orbit merge against the expected label count.
* ``dl-sim``  -- fine Deligne-Lusztig stratum point counts per extension.
* ``weyl``    -- element calculator (products, lengths, reduced words).

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import reporting
from .exceptions import ConfigurationError, ResourceCapError, UsageError, ZipstrataError
from .fq import field_for_q
from .fq_oracle import FqGroupSpec, dl_strata_counts, geometric_merge
from .parabolic import TypeSubset, all_subsets, coset_system, opposite_type
from .root_weyl import (
    CartanDatum,
    SUPPORTED_RANKS,
    apply_frobenius,
    build_root_system,
    multiply,
)
from .zip_poset import (
    compare_eo_twists,
    main_theorem_equivalence,
    make_zip_datum,
    sigma,
    sigma0,
    strata_poset,
    twisted_leq,
)


@dataclass
class RunConfig:
    command: str
    family: str = ""
    rank: int = 0
    I: tuple[int, ...] = ()
    frobenius: tuple[int, ...] = ()  # empty = split
    flavor: str = "EO"
    side: str = "left"
    fmt: str = "dot"
    out: str | None = None
    figure: str | None = None
    rank_max: int = 3
    oracle_family: str = "GL"
    oracle_n: int = 2
    oracle_q: int = 2
    weights: tuple[int, ...] = ()
    levels: tuple[int, ...] = (1, 2)
    extensions: tuple[int, ...] = (1,)
    label_levels: tuple[int, ...] | None = None
    cap: int | None = None
    levi_cap: int | None = None
    words: tuple[tuple[int, ...], ...] = ()
    inverse: bool = False


def _parse_type(text: str) -> tuple[str, int]:
    text = text.strip().upper()
    family = "".join(c for c in text if c.isalpha())
    digits = "".join(c for c in text if c.isdigit())
    if family == "G" and digits == "2":
        return "G2", 2
    if not family or not digits:
        raise UsageError(f"cannot parse Cartan type {text!r} (expected e.g. A2, C3, G2)")
    return family, int(digits)


def _parse_int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}")


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _datum(cfg: RunConfig) -> CartanDatum:
    try:
        return CartanDatum(cfg.family, cfg.rank, cfg.frobenius)
    except ConfigurationError:
        raise
    except Exception as exc:  # defensive
        raise UsageError(str(exc))


# -- poset ----------------------------------------------------------------------


def cmd_poset(cfg: RunConfig) -> int:
    rs = build_root_system(_datum(cfg))
    I = TypeSubset(frozenset(cfg.I))
    I.validate(rs.rank)
    datum = make_zip_datum(rs, I, cfg.flavor)
    poset = strata_poset(datum, cfg.side)
    meta = {
        "family": cfg.family,
        "rank": cfg.rank,
        "I": sorted(cfg.I),
        "frobenius": list(cfg.frobenius) if cfg.frobenius else "split",
        "flavor": cfg.flavor.upper(),
        "side": cfg.side,
    }
    title = f"{cfg.family}{cfg.rank} I={sorted(cfg.I)} {cfg.flavor.upper()} ({cfg.side})"
    if cfg.fmt == "dot":
        _write(reporting.poset_to_dot(poset, title), cfg.out)
    elif cfg.fmt == "json":
        _write(json.dumps(reporting.poset_to_dict(poset, meta), indent=2) + "\n", cfg.out)
    elif cfg.fmt == "tsv":
        _write(reporting.poset_to_tsv(poset), cfg.out)
    else:
        raise UsageError(f"unknown poset format {cfg.fmt!r}")
    if cfg.figure:
        reporting.render_poset_figure(poset, cfg.figure, title)
    return 0


# -- verify ---------------------------------------------------------------------


def _verify_case(rs, I: TypeSubset) -> list[dict]:
    """All per-(type, I) checks; 'ok' is None for informational entries."""
    results = []
    label = rs.datum.label()
    istr = "{" + ",".join(str(i) for i in I.sorted()) + "}"

    def record(check, ok, detail=""):
        results.append(
            {"type": label, "I": istr, "check": check, "ok": ok, "detail": detail}
        )

    J = opposite_type(rs, I)
    cs_i, cs_j = coset_system(rs, I), coset_system(rs, J)

    m = sigma0(rs, I)
    ok = set(m.values()) == set(cs_j.left_reps) and all(
        img.length == cs_j.w0_upper_I.length - w.length for w, img in m.items()
    )
    record("sigma0_bijection_length", ok)

    ok = (
        cs_j.w0_upper_I == cs_i.upper_I_w0
        and cs_i.w0_upper_I == cs_j.upper_I_w0
        and cs_i.w_I0
        == multiply(multiply(rs.longest(), cs_j.w_I0), rs.longest())
        and {multiply(multiply(rs.longest(), w), rs.longest()) for w in cs_i.w_I_elements}
        == set(cs_j.w_I_elements)
    )
    record("w0_conjugation_identities", ok)

    try:
        eo = make_zip_datum(rs, I, "EO")
        dl_j = make_zip_datum(rs, J, "DL")
        strata_poset(eo, "left")
        strata_poset(eo, "right")
        strata_poset(make_zip_datum(rs, I, "DL"), "left")
        record("poset_axioms", True)
    except ZipstrataError as exc:
        record("poset_axioms", False, str(exc))
        return results

    reversal_ok = True
    labels = eo.labels_left()
    for u in labels:
        for v in labels:
            if twisted_leq(eo, u, v) and not twisted_leq(dl_j, m[v], m[u]):
                reversal_ok = False
    record("order_reversal", reversal_ok)

    rep = main_theorem_equivalence(rs, I)
    record("eo_dl_equivalence", rep.holds, f"{rep.pairs_checked} pairs")

    sig_ok = True
    try:
        for flavor_datum in (eo, dl_j):
            images = {sigma(flavor_datum, w) for w in flavor_datum.labels_left()}
            sig_ok = sig_ok and images == set(flavor_datum.labels_right())
    except ZipstrataError as exc:
        sig_ok = False
    record("sigma_bijection", sig_ok)

    cmp = compare_eo_twists(rs, I)
    record(
        "z_twist_comparison",
        None,
        f"{'coincide' if cmp.coincide else f'differ on {len(cmp.mismatches)} pairs'}",
    )
    return results


def cmd_verify(cfg: RunConfig) -> int:
    results = []
    families = []
    for family, ranks in SUPPORTED_RANKS.items():
        for rank in ranks:
            if rank <= cfg.rank_max:
                families.append((family, rank))
    for family, rank in sorted(families):
        rs = build_root_system(CartanDatum(family, rank))
        for I in all_subsets(rank):
            results.extend(_verify_case(rs, I))
    mandatory = [r for r in results if r["ok"] is not None]
    failures = [r for r in mandatory if not r["ok"]]
    if cfg.fmt == "json":
        _write(json.dumps({"results": results, "failures": len(failures)}, indent=2) + "\n", cfg.out)
    elif cfg.fmt == "tsv":
        rows = [
            (r["type"], r["I"], r["check"], {True: "pass", False: "FAIL", None: "info"}[r["ok"]], r["detail"])
            for r in results
        ]
        _write(reporting.rows_to_tsv(("type", "I", "check", "status", "detail"), rows), cfg.out)
    else:
        lines = []
        for r in results:
            status = {True: "pass", False: "FAIL", None: "info"}[r["ok"]]
            detail = f"  [{r['detail']}]" if r["detail"] else ""
            lines.append(f"{r['type']:>3} I={r['I']:<10} {r['check']:<26} {status}{detail}")
        lines.append(
            f"\n{len(mandatory) - len(failures)}/{len(mandatory)} mandatory checks passed"
            f" over {len({(r['type'], r['I']) for r in results})} (type, I) cases\n"
        )
        _write("\n".join(lines), cfg.out)
    if cfg.figure:
        reporting.render_verify_figure(
            [dict(r, ok=bool(r["ok"])) if r["ok"] is not None else dict(r, ok=True) for r in results],
            cfg.figure,
        )
    return 1 if failures else 0


# -- oracle ---------------------------------------------------------------------


def _oracle_spec(cfg: RunConfig) -> FqGroupSpec:
    weights = cfg.weights or tuple(range(cfg.oracle_n - 1, -1, -1))
    return FqGroupSpec(
        cfg.oracle_family.upper(), cfg.oracle_n, field_for_q(cfg.oracle_q), weights
    )


def cmd_oracle(cfg: RunConfig) -> int:
    spec = _oracle_spec(cfg)
    report = geometric_merge(spec, cfg.flavor, cfg.levels, cap=cfg.cap, levi_cap=cfg.levi_cap)
    rows = [
        (
            spec.label(),
            cfg.flavor.upper(),
            lv,
            report.merged_counts[i],
            report.expected,
            report.level_methods[i],
        )
        for i, lv in enumerate(report.levels)
    ]
    header = ("group", "flavor", "level", "merged_count", "expected", "method")
    summary = [
        ("stable", "yes" if report.stable else "NO"),
        ("matches_expected", "yes" if report.merged_count == report.expected else "NO"),
        ("reps_distinct", "yes" if report.reps_distinct else "NO"),
        ("base_orbits", report.base_orbit_count),
    ]
    if cfg.fmt == "json":
        payload = {
            "group": spec.label(),
            "flavor": cfg.flavor.upper(),
            "levels": list(report.levels),
            "merged_counts": list(report.merged_counts),
            "expected": report.expected,
            "stable": report.stable,
            "reps_distinct": report.reps_distinct,
            "representative_classes": {
                "".join(map(str, k)) or "e": v for k, v in report.representative_classes.items()
            },
            "methods": list(report.level_methods),
        }
        _write(json.dumps(payload, indent=2) + "\n", cfg.out)
    else:
        text = reporting.rows_to_tsv(header, rows)
        text += reporting.rows_to_tsv(("key", "value"), summary)
        _write(text, cfg.out)
    if cfg.figure:
        reporting.render_merge_figure(report, cfg.figure)
    return 0


def cmd_dl_sim(cfg: RunConfig) -> int:
    spec = _oracle_spec(cfg)
    reports = [
        dl_strata_counts(
            spec, m, label_levels=cfg.label_levels, cap=cfg.cap, levi_cap=cfg.levi_cap
        )
        for m in cfg.extensions
    ]
    rows = []
    for rep in reports:
        for word in rep.labels:
            rows.append(
                (
                    spec.label(),
                    rep.m,
                    "".join(map(str, word)) or "e",
                    rep.lengths[word],
                    rep.counts[word],
                    rep.flag_total,
                    "ok" if rep.conclusive else f"{rep.unresolved} unresolved",
                )
            )
    header = ("group", "m", "label", "length", "count", "flag_points", "status")
    if cfg.fmt == "json":
        payload = [
            {
                "group": spec.label(),
                "m": rep.m,
                "counts": {"".join(map(str, w)) or "e": rep.counts[w] for w in rep.labels},
                "lengths": {"".join(map(str, w)) or "e": rep.lengths[w] for w in rep.labels},
                "flag_points": rep.flag_total,
                "unresolved": rep.unresolved,
            }
            for rep in reports
        ]
        _write(json.dumps(payload, indent=2) + "\n", cfg.out)
    else:
        _write(reporting.rows_to_tsv(header, rows), cfg.out)
    if cfg.figure:
        reporting.render_strata_figure(reports, cfg.figure)
    return 0


# -- weyl calculator -------------------------------------------------------------


def cmd_weyl(cfg: RunConfig) -> int:
    rs = build_root_system(_datum(cfg))
    if not cfg.words:
        raise UsageError("weyl requires at least one --word")
    w = rs.identity()
    for word in cfg.words:
        for i in word:
            if not 1 <= i <= rs.rank:
                raise UsageError(f"letter {i} out of range 1..{rs.rank}")
        w = multiply(w, rs.from_word(word))
    if cfg.inverse:
        w = w.inverse()
    frob = apply_frobenius(rs.datum, w)
    payload = {
        "type": rs.datum.label(),
        "word": list(w.reduced_word()),
        "display": w.word_str(),
        "length": w.length,
        "frobenius_image": frob.word_str(),
    }
    if cfg.fmt == "json":
        _write(json.dumps(payload, indent=2) + "\n", cfg.out)
    else:
        _write(
            reporting.rows_to_tsv(
                ("type", "word", "length", "frobenius_image"),
                [(payload["type"], payload["display"], payload["length"], payload["frobenius_image"])],
            ),
            cfg.out,
        )
    return 0


# -- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zipstrata",
        description="Weyl-group combinatorics of algebraic zip data with a finite-field oracle",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", help="write output to this path (default stdout)")
        p.add_argument("--figure", help="also render a figure (PNG) to this path")
        p.add_argument("--cap", type=int, help="override enumeration caps")

    p = sub.add_parser("poset", help="build and export a strata poset")
    p.add_argument("--type", required=True, help="Cartan type, e.g. A2, C3, G2")
    p.add_argument("--I", default="", help="comma-separated parabolic type, e.g. 1,3")
    p.add_argument("--flavor", default="eo", choices=["eo", "dl", "EO", "DL"])
    p.add_argument("--frobenius", default="split", help="'split' or a permutation like 2,1")
    p.add_argument("--side", default="left", choices=["left", "right"])
    p.add_argument("--format", default="dot", choices=["dot", "json", "tsv"])
    add_common(p)

    p = sub.add_parser("verify", help="run the exhaustive verification suite")
    p.add_argument("--rank-max", type=int, default=3)
    p.add_argument("--format", default="text", choices=["text", "json", "tsv"])
    add_common(p)

    p = sub.add_parser("oracle", help="finite-field orbit merge vs the label count")
    p.add_argument("--family", default="gl", choices=["gl", "sl", "GL", "SL"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--weights", default="", help="weakly decreasing, e.g. 1,0")
    p.add_argument("--flavor", default="eo", choices=["eo", "dl", "EO", "DL"])
    p.add_argument("--levels", default="1,2", help="extension tower, e.g. 1,2")
    p.add_argument("--levi-cap", type=int, dest="levi_cap")
    p.add_argument("--format", default="tsv", choices=["tsv", "json"])
    add_common(p)

    p = sub.add_parser("dl-sim", help="fine DL stratum point counts")
    p.add_argument("--family", default="gl", choices=["gl", "sl", "GL", "SL"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--weights", default="", help="default: Borel weights n-1..0")
    p.add_argument("--m", default="1", help="extension degrees, e.g. 1,2,3")
    p.add_argument("--label-levels", default="", dest="label_levels")
    p.add_argument("--levi-cap", type=int, dest="levi_cap")
    p.add_argument("--format", default="tsv", choices=["tsv", "json"])
    add_common(p)

    p = sub.add_parser("weyl", help="element calculator")
    p.add_argument("--type", required=True)
    p.add_argument("--word", action="append", default=[], help="comma-separated letters; repeatable")
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--frobenius", default="split")
    p.add_argument("--format", default="tsv", choices=["tsv", "json"])
    add_common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.out = getattr(args, "out", None)
    cfg.figure = getattr(args, "figure", None)
    cfg.cap = getattr(args, "cap", None)
    cfg.fmt = getattr(args, "format", "tsv")
    if args.command in ("poset", "weyl"):
        cfg.family, cfg.rank = _parse_type(args.type)
        frob = getattr(args, "frobenius", "split")
        cfg.frobenius = () if frob == "split" else _parse_int_list(frob)
    if args.command == "poset":
        cfg.I = _parse_int_list(args.I)
        cfg.flavor = args.flavor.upper()
        cfg.side = args.side
    if args.command == "verify":
        cfg.rank_max = args.rank_max
    if args.command in ("oracle", "dl-sim"):
        cfg.oracle_family = args.family.upper()
        cfg.oracle_n = args.n
        cfg.oracle_q = args.q
        cfg.weights = _parse_int_list(args.weights)
        cfg.flavor = getattr(args, "flavor", "dl").upper()
        cfg.levi_cap = args.levi_cap
    if args.command == "oracle":
        cfg.levels = _parse_int_list(args.levels)
    if args.command == "dl-sim":
        cfg.extensions = _parse_int_list(args.m)
        lv = _parse_int_list(args.label_levels)
        cfg.label_levels = lv or None
    if args.command == "weyl":
        cfg.words = tuple(_parse_int_list(w) for w in args.word)
        cfg.inverse = args.inverse
    return cfg


COMMANDS = {
    "poset": cmd_poset,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "dl-sim": cmd_dl_sim,
    "weyl": cmd_weyl,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
