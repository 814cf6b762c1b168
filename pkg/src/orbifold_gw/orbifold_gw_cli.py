# -*- coding: utf-8 -*-
"""命令行入口：census / ring / rr / maps / correlator。stdout 只输出数据，诊断信息走 stderr。"""
import argparse
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import IO, Any, Dict, List, Optional, Sequence

from orbifold_gw.CorrelatorSystem import (
    CorrelatorTable,
    dilaton_reduce,
    divisor_reduce,
    p1_reconstruct,
    parse_class,
    parse_key,
    seed_from_ring,
    string_reduce,
    wdvv_check,
    wdvv_residual,
)
from orbifold_gw.InertiaSystem import (
    Sector,
    Weights,
    census,
    census_to_json,
    format_age,
    wps_census,
)
from orbifold_gw.OrbifoldConfig import OrbifoldConfig, parse_weights
from orbifold_gw.PolynomialAlgebra import rational_from_text, rational_to_text
from orbifold_gw.QuantumRing import (
    QuantumRing,
    classical_presentation,
    pairing_matrix,
    quantum_presentation,
    verify_ring,
)
from orbifold_gw.SettingManager import DEFAULT_SETTING_FILE, SettingManager
from orbifold_gw.TwistedCurveSystem import (
    Football,
    MapSpec,
    PicClass,
    SheafClass,
    euler_char,
    h0_genus0,
    map_degree,
    pic_canonical,
    pic_degree,
    solve_map_picard,
    torsion_class,
    virtual_dim,
)
from orbifold_gw.errors import MissingCorrelatorError, OrbifoldGWError, RingVerificationError, WdvvResidualError
from orbifold_gw.orbifold_error_log import LOG_PREFIX, ErrorRecord, append_error_log

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

LOGGER_NAME = "orbifold_gw"


class _ArgumentParser(argparse.ArgumentParser):
    """用法错误抛出异常而不是直接退出，由 run() 统一换算成退出码 2。"""

    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="KEY=value settings file (gw_setting.yml)")
    common.add_argument("--weights", help="a,b")
    common.add_argument("--truncate", type=int, help="q truncation N")
    common.add_argument("--format", choices=("json", "table"), dest="output_format")
    common.add_argument("--seed", type=int, help="seed for randomized confluence checks")
    common.add_argument("--workers", type=int, help="thread pool size for structure constants and scans")
    common.add_argument("--out", help="write output to FILE instead of stdout")
    common.add_argument("--denominator", type=int, help="render rationals over this denominator in tables")
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _ArgumentParser(prog="orbifold-gw", description="Orbifold Gromov-Witten toolkit for P(a,b)")
    commands = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
    commands.required = True

    census_parser = commands.add_parser("census", parents=[common], help="inertia census")
    census_parser.add_argument("--wps", help="weights w0,w1,... of a weighted projective space")

    ring = commands.add_parser("ring", parents=[common], help="stringy / quantum Chow ring")
    ring.add_argument("action", choices=("present", "constants", "verify"))
    ring.add_argument("--bezout-n", type=int, help="alternative n with n*b = d (mod a)")
    ring.add_argument("--no-zeta-factor", action="store_true", help="drop zeta^(n-m) from the second relation")

    rr = commands.add_parser("rr", parents=[common], help="Riemann-Roch on twisted curves")
    rr.add_argument("action", choices=("chi", "h0", "vdim"))
    rr.add_argument("--genus", type=int, default=0)
    rr.add_argument("--rank", type=int, default=1)
    rr.add_argument("--sheaf-degree", default="0", help="degree as p/q")
    rr.add_argument("--ages", default="", help="comma separated p/q, one per marking")
    rr.add_argument("--orders", default="", help="comma separated marking orders")
    rr.add_argument("--torsion", help="r,k for the torsion sheaf at a marking of order r")
    rr.add_argument("--class", dest="pic_class", help="z0,zinf")
    rr.add_argument("--degree", type=int, default=1, help="beta multiple k")
    rr.add_argument("--sectors", default="", help="marking sectors, e.g. Point0{1},PointInf{5},OneDim{0}")

    maps = commands.add_parser("maps", parents=[common], help="Picard solutions for maps to P(a,b)")
    maps.add_argument("action", choices=("solve",))
    maps.add_argument("--degree", type=int, default=1)
    maps.add_argument("--third-order", type=int, default=1)

    correlator = commands.add_parser("correlator", parents=[common], help="genus 0 correlators")
    correlator.add_argument("action", choices=("seed", "reduce", "wdvv", "p1"))
    correlator.add_argument("--beta", type=int, default=0)
    correlator.add_argument("--key", default="", help="insertions, e.g. 'tau1(1),pt,pt'")
    correlator.add_argument("--rule", choices=("evaluate", "string", "dilaton", "divisor"), default="evaluate")
    correlator.add_argument("--four", default="", help="four classes for WDVV")
    correlator.add_argument("--extras", default="", help="extra insertions for WDVV")
    correlator.add_argument("--table", help="JSON lines correlator table to use instead of the seed")
    correlator.add_argument("--max-beta", type=int, default=3)
    correlator.add_argument("--max-insertions", type=int, default=5)
    correlator.add_argument("--check", action="store_true", help="p1: scan all WDVV quadruples")
    return parser


def _configure_logger(verbose: bool, stderr: IO[str]) -> logging.Logger:
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if getattr(handler, "_orbifold_gw_cli", False):
            logger.removeHandler(handler)
    handler = logging.StreamHandler(stderr)
    handler._orbifold_gw_cli = True
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False
    return logger


def _split(text: str) -> List[str]:
    return [part.strip() for part in (text or "").split(",") if part.strip()]


def _parse_sectors(text: str) -> List[Sector]:
    sectors = []
    for token in _split(text):
        name, _, rest = token.partition("{")
        sectors.append(Sector.from_json({"type": name, "label": rest.rstrip("}")}))
    return sectors


def _render_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [list(map(str, headers))] + [[str(value) for value in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(value.ljust(width) for value, width in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


class OrbifoldGWCli:
    """一次调用：解析配置、分发子命令、把结果写到 stdout 或 --out。"""

    def __init__(self, args: argparse.Namespace, stdout: IO[str], stderr: IO[str]):
        self.args = args
        self.stdout = stdout
        self.stderr = stderr
        self.logger = _configure_logger(args.verbose, stderr)
        setting_path = args.config or (DEFAULT_SETTING_FILE if DEFAULT_SETTING_FILE.exists() else None)
        settings = SettingManager(setting_path)
        self.config = OrbifoldConfig.from_settings(
            settings,
            {
                "weights": parse_weights(args.weights) if args.weights else None,
                "q_truncation": args.truncate,
                "output_format": args.output_format,
                "seed": args.seed,
                "workers": args.workers,
            },
            logger=self.logger,
        )
        self.weights = self.config.target()

    def _persistent_error(self, error_code: str, detail: str, exception=None, extra_context: Optional[Dict[str, Any]] = None):
        """写入 ERROR_LOG_PATH（若配置）并打 logger。"""
        if self.config.error_log_path:
            record = ErrorRecord(
                error_code,
                detail,
                target=self.weights.label(),
                truncation=self.config.q_truncation,
                exception=exception,
                context=dict(extra_context or {}),
            )
            if not append_error_log(self.config.error_log_path, record):
                self.logger.warning(f"{LOG_PREFIX} cannot write error log {self.config.error_log_path}")
        suffix = f" | {exception}" if exception else ""
        self.logger.error(f"{LOG_PREFIX}[{error_code}] {detail}{suffix}")

    def _emit(self, payload: Any, table: Optional[str] = None):
        if self.config.output_format == "table" and table is not None:
            text = table
        elif isinstance(payload, str):
            text = payload
        else:
            text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        if self.args.out:
            Path(self.args.out).write_text(text, encoding="utf-8")
        else:
            self.stdout.write(text)

    def _ring(self) -> QuantumRing:
        w = self.weights
        if getattr(self.args, "bezout_n", None) is not None:
            w = w.with_bezout(self.args.bezout_n)
        ring = QuantumRing(
            w,
            self.config.q_truncation,
            include_zeta_factor=not getattr(self.args, "no_zeta_factor", False),
            logger=self.logger,
        )
        ring.set_persistent_error_callback(
            lambda code, detail, exc: self._persistent_error(code, detail, exc)
        )
        return ring

    def on_command(self) -> int:
        command = self.args.command
        if command == "census":
            return self._census()
        if command == "ring":
            return self._ring_command()
        if command == "rr":
            return self._rr()
        if command == "maps":
            return self._maps()
        if command == "correlator":
            return self._correlator()
        raise _UsageError(f"unknown command {command}")

    def _census(self) -> int:
        if self.args.wps:
            sectors = wps_census(parse_weights(self.args.wps))
            rows = [
                (rational_to_text(s.twist), ",".join(map(str, s.fixed)), s.dimension, s.band_order, format_age(s.age, self.args.denominator))
                for s in sectors
            ]
            self._emit([s.to_json() for s in sectors], _render_table(("twist", "fixed", "dim", "r", "age"), rows))
            return EXIT_OK
        components = census(self.weights, self.logger)
        rows = [
            (str(c.sector), c.dimension, c.band_order, format_age(c.age, self.args.denominator))
            for c in components
        ]
        self._emit(census_to_json(self.weights, components), _render_table(("sector", "dim", "r", "age"), rows))
        return EXIT_OK

    def _ring_command(self) -> int:
        action = self.args.action
        ring = self._ring()
        if action == "present":
            payload = {
                "quantum": quantum_presentation(ring.weights, ring.include_zeta_factor).to_json(),
                "classical": classical_presentation(ring.weights, ring.include_zeta_factor).to_json(),
                "rules": [rule.to_text() for rule in ring.rewrite.rules],
            }
            table = "".join(f"{r}\n" for r in ring.presentation.relations)
            self._emit(payload, table)
            return EXIT_OK
        if action == "constants":
            sc = ring.structure_constants(self.config.workers, self.config.seed, self.config.confluence_samples)
            rows = [
                (sc.basis[e["i"]], sc.basis[e["j"]], sc.basis[e["k"]], " + ".join(f"{s['coeff']} q^{s['qpow']}" for s in e["series"]))
                for e in sc.sparse_entries()
            ]
            self._emit(sc.to_json(), _render_table(("i", "j", "k", "series"), rows))
            return EXIT_OK
        report = verify_ring(
            ring.weights,
            self.config.q_truncation,
            ring.include_zeta_factor,
            workers=self.config.workers,
            seed=self.config.seed,
            samples=self.config.confluence_samples,
            logger=self.logger,
        )
        rows = [(check.name, "pass" if check.passed else "FAIL", "; ".join(check.failures[:1])) for check in report.checks]
        self._emit(report.to_json(), _render_table(("check", "status", "first failure"), rows))
        try:
            report.raise_on_failure()
        except RingVerificationError as e:
            self._persistent_error(
                e.error_code,
                e.detail,
                None,
                {"bezout": f"n={ring.weights.n},m={ring.weights.m}", "zeta_factor": ring.include_zeta_factor},
            )
            return EXIT_VERIFICATION_FAILED
        return EXIT_OK

    def _rr(self) -> int:
        action = self.args.action
        w = self.weights
        if action == "chi":
            if self.args.torsion:
                r, k = (int(v) for v in _split(self.args.torsion))
                sheaf = torsion_class(r, k)
                curve = Football(self.args.genus, (r,))
            else:
                orders = tuple(int(v) for v in _split(self.args.orders))
                ages = tuple(rational_from_text(v) for v in _split(self.args.ages))
                sheaf = SheafClass(self.args.rank, rational_from_text(self.args.sheaf_degree), ages)
                curve = Football(self.args.genus, orders)
            value = euler_char(sheaf, curve)
            self._emit({"chi": rational_to_text(value)}, f"chi = {rational_to_text(value)}\n")
            return EXIT_OK
        if action == "h0":
            z0, z_inf = (int(v) for v in _split(self.args.pic_class or "0,0"))
            bundle = PicClass(z0, z_inf)
            payload = {
                "class": bundle.to_json(),
                "canonical": pic_canonical(bundle, w.a, w.b).to_json(),
                "degree": rational_to_text(pic_degree(bundle, w.a, w.b)),
                "h0": h0_genus0(bundle, w.a, w.b),
            }
            self._emit(payload, f"h0 = {payload['h0']}  degree = {payload['degree']}\n")
            return EXIT_OK
        spec = MapSpec.build(w, self.args.degree, _parse_sectors(self.args.sectors))
        value = virtual_dim(spec)
        self._emit({"vdim": rational_to_text(value)}, f"vdim = {rational_to_text(value)}\n")
        return EXIT_OK

    def _maps(self) -> int:
        w = self.weights
        solutions = solve_map_picard(w, self.args.degree, self.args.third_order)
        payload = {
            "weights": [w.a, w.b],
            "degree": rational_to_text(map_degree(w, self.args.degree)),
            "third_order": self.args.third_order,
            "solutions": [p.to_json() for p in solutions],
        }
        rows = [(p.z0, p.z_inf, ",".join(map(str, p.torsion))) for p in solutions]
        self._emit(payload, _render_table(("z0", "zinf", "torsion"), rows))
        return EXIT_OK

    def _table(self):
        """(1,1) 用重建表，其余权重用环给出的种子；--table 给出时从文件加载。"""
        ring = self._ring()
        sc = ring.structure_constants(self.config.workers, self.config.seed, self.config.confluence_samples)
        pairing = pairing_matrix(sc)
        if self.args.table:
            with open(self.args.table, encoding="utf-8") as f:
                table = CorrelatorTable.load(self.weights, f, sc)
        elif (self.weights.a, self.weights.b) == (1, 1):
            table = p1_reconstruct(max(self.config.q_truncation, 1), self.args.max_insertions, self.logger)
        else:
            table = seed_from_ring(sc, pairing)
        return table, sc, pairing

    def _dump(self, table: CorrelatorTable) -> str:
        buffer = io.StringIO()
        table.dump(buffer)
        return buffer.getvalue()

    def _correlator(self) -> int:
        action = self.args.action
        w = self.weights
        if action == "p1":
            table = p1_reconstruct(self.args.max_beta, self.args.max_insertions, self.logger)
            if self.args.check:
                pairing = pairing_matrix(table.structure)
                failures = wdvv_check(table, pairing, self.args.max_beta, workers=self.config.workers)
                if failures:
                    self._persistent_error(
                        WdvvResidualError.error_code,
                        f"{len(failures)} WDVV quadruples on the P1 table are nonzero or incomplete",
                        extra_context={"max_beta": self.args.max_beta},
                    )
                    self._emit({"passed": False, "failures": [result.to_json() for result in failures]})
                    return EXIT_VERIFICATION_FAILED
            self._emit(self._dump(table))
            return EXIT_OK
        table, sc, pairing = self._table()
        if action == "seed":
            self._emit(self._dump(table))
            return EXIT_OK
        if action == "reduce":
            key = parse_key(w, self.args.beta, self.args.key)
            rule = self.args.rule
            if rule == "evaluate":
                value = table.evaluate(key)
                self._emit({"key": str(key), "value": rational_to_text(value)}, f"{key} = {rational_to_text(value)}\n")
                return EXIT_OK
            if rule == "dilaton":
                factor, reduced = dilaton_reduce(key)
                terms = {reduced: Fraction(factor)} if factor else {}
            elif rule == "string":
                terms = string_reduce(key)
            else:
                terms = divisor_reduce(key, w, sc)
            payload = {
                "key": str(key),
                "terms": [
                    {"coeff": rational_to_text(coeff), "key": str(term)}
                    for term, coeff in sorted(terms.items(), key=lambda item: item[0].sort_key())
                ],
            }
            table_text = "".join(f"{row['coeff']} * {row['key']}\n" for row in payload["terms"]) or "0\n"
            self._emit(payload, table_text)
            return EXIT_OK
        four = [parse_class(w, token) for token in _split(self.args.four)]
        extras = [parse_class(w, token) for token in _split(self.args.extras)]
        residual = wdvv_residual(table, four, extras, self.args.beta, pairing)
        self._emit({"residual": rational_to_text(residual), "beta": self.args.beta}, f"residual = {rational_to_text(residual)}\n")
        return EXIT_OK if residual == 0 else EXIT_VERIFICATION_FAILED


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[IO[str]] = None, stderr: Optional[IO[str]] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
    except _UsageError as e:
        stderr.write(f"{LOG_PREFIX} usage error: {e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    try:
        cli = OrbifoldGWCli(args, stdout, stderr)
        return cli.on_command()
    except MissingCorrelatorError as e:
        stderr.write(f"{LOG_PREFIX} {e}\n")
        return EXIT_VERIFICATION_FAILED
    except (OrbifoldGWError, _UsageError, ValueError) as e:
        stderr.write(f"{LOG_PREFIX} {e}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
