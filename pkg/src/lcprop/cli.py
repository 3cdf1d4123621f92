"""Command-line interface: ``lcprop compile|dump-table|parse|compare``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

from .dag import constraints_of
from .grammar import GrammarError, load_grammar
from .parser import (
    BOTTOM_UP,
    CATEGORY_ONLY,
    FILTERED,
    MODES,
    ParseLimitExceeded,
    UnknownToken,
    parse,
    read_corpus,
    stats_compare,
)
from .precompile import NonterminationGuard, category_only, compile_table

EXIT_OK = 0
EXIT_NO_PARSE = 1
EXIT_GRAMMAR = 2
EXIT_GUARD = 3
EXIT_IO = 4


@dataclass
class RunConfig:
    grammar_path: str
    corpus_path: Optional[str] = None
    mode: str = FILTERED
    output_format: str = "text"
    out: Optional[str] = None
    max_iterations: Optional[int] = None
    timing: bool = False
    sentence: list = field(default_factory=list)


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Failure(EXIT_IO, f"cannot read {path}: {exc.strerror}")


def _grammar(cfg: RunConfig):
    text = _read(cfg.grammar_path)
    try:
        return load_grammar(text)
    except GrammarError as exc:
        raise _Failure(EXIT_GRAMMAR, f"{cfg.grammar_path}: {exc}")


def _tables(cfg: RunConfig, grammar, mode: str):
    if mode == BOTTOM_UP:
        return None, None, None
    base = category_only(grammar) if mode == CATEGORY_ONLY else ()
    try:
        return compile_table(grammar, base, cfg.max_iterations)
    except NonterminationGuard as exc:
        raise _Failure(EXIT_GUARD, f"precompilation did not terminate: {exc}")


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise _Failure(EXIT_IO, f"cannot write {cfg.out}: {exc.strerror}")
    else:
        sys.stdout.write(text)


def cmd_compile(cfg: RunConfig) -> int:
    grammar = _grammar(cfg)
    table, ledger, report = _tables(cfg, grammar, cfg.mode if cfg.mode != BOTTOM_UP else FILTERED)
    if cfg.output_format == "structured":
        payload = {
            "entries": [
                {
                    "goal": e.goal,
                    "chain": list(e.chain),
                    "restrictor": sorted(e.restrictor - table.base_restrictor),
                    "constraints": [str(c) for c in constraints_of(e.dag)],
                }
                for e in table
            ],
            "restrictors": [
                {"goal": goal, "chain": list(chain), "features": sorted(feats)}
                for (goal, chain), feats in ledger.items()
            ],
            "detections": [
                {"goal": ev.key[0], "chain": list(ev.key[1]), "features": sorted(ev.features), "case": ev.case}
                for ev in report.detections
            ],
        }
        if cfg.timing:
            payload["wall_time"] = report.wall_time
        _emit(cfg, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    text = "# table\n" + table.dump()
    text += "\n# restrictors\n" + ledger.dump()
    text += "\n# report\n" + report.render(ledger, cfg.timing)
    _emit(cfg, text)
    return EXIT_OK


def cmd_dump_table(cfg: RunConfig) -> int:
    grammar = _grammar(cfg)
    table, _, _ = _tables(cfg, grammar, cfg.mode if cfg.mode != BOTTOM_UP else FILTERED)
    _emit(cfg, table.dump())
    return EXIT_OK


def cmd_parse(cfg: RunConfig) -> int:
    grammar = _grammar(cfg)
    table, ledger, _ = _tables(cfg, grammar, cfg.mode)
    tokens = cfg.sentence
    if len(tokens) == 1:
        tokens = tokens[0].split()
    try:
        result = parse(grammar, tokens, table, ledger)
    except UnknownToken as exc:
        raise _Failure(EXIT_GRAMMAR, str(exc))
    except ParseLimitExceeded as exc:
        raise _Failure(EXIT_GRAMMAR, str(exc))
    stats = result.stats
    if cfg.output_format == "structured":
        payload = {
            "tokens": list(tokens),
            "mode": cfg.mode,
            "parses": [[str(c) for c in constraints_of(p)] for p in result.parses],
            "edges_entered": stats.edges_entered,
            "edges_filtered": stats.edges_filtered,
            "unifications_attempted": stats.unifications_attempted,
        }
        _emit(cfg, json.dumps(payload, sort_keys=True) + "\n")
    else:
        lines = [f"{len(result.parses)} parse(s) of: {' '.join(tokens)} [{cfg.mode}]"]
        for i, p in enumerate(result.parses, 1):
            lines.append(f"parse {i}:")
            lines.extend(f"  {c}" for c in constraints_of(p))
        lines.append(
            f"edges entered: {stats.edges_entered}, filtered: {stats.edges_filtered}, "
            f"unifications: {stats.unifications_attempted}"
        )
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if result.parses else EXIT_NO_PARSE


def cmd_compare(cfg: RunConfig) -> int:
    grammar = _grammar(cfg)
    corpus = read_corpus(_read(cfg.corpus_path))
    table, ledger, _ = _tables(cfg, grammar, FILTERED)
    cat_table, cat_ledger, _ = _tables(cfg, grammar, CATEGORY_ONLY)
    report = stats_compare(grammar, table, ledger, corpus, cat_table, cat_ledger)
    if cfg.output_format == "structured":
        _emit(cfg, report.render_structured())
    else:
        _emit(cfg, report.render_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lcprop",
        description="Left-corner reachability tables with per-path restrictors.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_mode=True):
        p.add_argument("grammar", help="grammar file")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", dest="output_format", choices=("text", "structured"), default="text")
        p.add_argument("--max-iterations", type=int, default=None,
                       help="cycle-closure guard (default: |features| x |rules| x 4)")
        if with_mode:
            p.add_argument("--mode", choices=MODES, default=FILTERED)

    p = sub.add_parser("compile", help="compile the reachability table and report restrictors")
    common(p)
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p = sub.add_parser("dump-table", help="print the reachability table only")
    common(p)
    p = sub.add_parser("parse", help="parse one sentence")
    common(p)
    p.add_argument("sentence", nargs="+", help="tokens (or one quoted sentence)")
    p = sub.add_parser("compare", help="edge counts across the three parsing modes")
    common(p, with_mode=False)
    p.add_argument("corpus", help="one whitespace-tokenized sentence per line")
    return ap


COMMANDS = {
    "compile": cmd_compile,
    "dump-table": cmd_dump_table,
    "parse": cmd_parse,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        grammar_path=args.grammar,
        corpus_path=getattr(args, "corpus", None),
        mode=getattr(args, "mode", FILTERED),
        output_format=args.output_format,
        out=args.out,
        max_iterations=args.max_iterations,
        timing=getattr(args, "timing", False),
        sentence=getattr(args, "sentence", []),
    )
    try:
        return COMMANDS[args.command](cfg)
    except _Failure as exc:
        print(f"lcprop: {exc.message}", file=sys.stderr)
        if args.command == "parse":
            return EXIT_GRAMMAR
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
