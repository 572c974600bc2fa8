"""Identity corpus and the verification harness.

Entries live in DSL files (``data/*.tf``).  ``THETAFORGE_CORPUS`` may name
a file or directory (or several, separated by ``os.pathsep``) to load instead.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from ..expr import (
    Block,
    DslError,
    Env,
    Equation,
    Let,
    Option,
    Param,
    lower_expr,
    lower_mono,
    parse_file,
)
from ..series import Rat, rat
from ..theta import Side, expand_side

__all__ = [
    "Identity",
    "Mismatch",
    "VerifyReport",
    "CORPUS_ENV",
    "DATA_DIR",
    "load_identities",
    "corpus_list",
    "lookup",
    "verify",
    "verify_all",
    "summarize",
]

CORPUS_ENV = "THETAFORGE_CORPUS"
DATA_DIR = Path(__file__).parent / "data"
STATUSES = ("pass", "fail", "paper-discrepancy")
DEFAULT_HINT = 40


@dataclass(frozen=True)
class Mismatch:
    qexp: Rat
    vexp: Tuple[Tuple[str, Rat], ...]
    lhs: int
    rhs: int

    def as_dict(self) -> dict:
        return {
            "qexp": _num(self.qexp),
            "vexp": {k: _num(v) for k, v in self.vexp},
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


def _num(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class VerifyReport:
    name: str
    order: Rat
    status: str
    mismatch: Optional[Mismatch] = None
    millis: int = 0
    error: Optional[str] = None
    params: Tuple[Tuple[str, int], ...] = ()

    @property
    def ok(self) -> bool:
        return self.status != "fail"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "order": _num(self.order),
            "status": self.status,
            "mismatch": self.mismatch.as_dict() if self.mismatch else None,
            "millis": self.millis,
        }

    def line(self) -> str:
        out = f"{self.name:<28} order {_num(self.order)!s:<4} {self.status}"
        if self.mismatch:
            m = self.mismatch
            where = f"q^{_num(m.qexp)}" + "".join(f"*{k}^{_num(v)}" for k, v in m.vexp)
            at = "".join(f" {k}={v}" for k, v in self.params)
            out += f"  first mismatch at {where}: lhs {m.lhs}, rhs {m.rhs}{at}"
        if self.error:
            out += f"  error: {self.error}"
        return out


@dataclass(frozen=True)
class Identity:
    """One corpus entry: a literal equation, an optional corrected one, and its parameters."""

    name: str
    equation: Equation
    corrected: Optional[Equation] = None
    params: Tuple[Param, ...] = ()
    lets: Tuple[Let, ...] = ()
    order_hint: int = DEFAULT_HINT
    status: str = "pass"
    note: str = ""
    options: Tuple[Tuple[str, object], ...] = ()
    source: str = ""

    @classmethod
    def from_block(cls, block: Block, source: str = "") -> "Identity":
        eqs, corrected, params, lets, opts = [], None, [], [], {}
        for it in block.items:
            if isinstance(it, Equation):
                if it.label == "corrected":
                    if corrected is not None:
                        raise DslError(f"{block.name}: more than one corrected form")
                    corrected = it
                else:
                    eqs.append(it)
            elif isinstance(it, Param):
                params.append(it)
            elif isinstance(it, Let):
                lets.append(it)
            elif isinstance(it, Option):
                if it.key in opts:
                    raise DslError(f"{block.name}: option {it.key!r} given twice")
                opts[it.key] = it.value
        if len(eqs) != 1:
            raise DslError(f"{block.name}: expected exactly one equation, found {len(eqs)}")
        status = opts.pop("status", "pass")
        if status not in ("pass", "paper-discrepancy"):
            raise DslError(f"{block.name}: unknown status {status!r}")
        if status == "paper-discrepancy" and corrected is None:
            raise DslError(f"{block.name}: a paper-discrepancy entry needs a corrected form")
        hint = opts.pop("order", DEFAULT_HINT)
        if not isinstance(hint, int):
            raise DslError(f"{block.name}: order must be an integer")
        note = opts.pop("note", "")
        return cls(
            name=block.name,
            equation=eqs[0],
            corrected=corrected,
            params=tuple(params),
            lets=tuple(lets),
            order_hint=hint,
            status=status,
            note=str(note),
            options=tuple(sorted(opts.items())),
            source=source,
        )

    def option(self, key: str, default=None):
        return dict(self.options).get(key, default)

    # -- instantiation -----------------------------------------------------
    def instances(self) -> Iterator[Env]:
        """One environment per parameter combination, with lets bound."""

        def rec(i: int, env: Env):
            if i == len(self.params):
                yield env
                return
            p = self.params[i]
            for v in p.values(env):
                yield from rec(i + 1, env.child(**{p.name: v}))

        for env in rec(0, Env()):
            for let in self.lets:
                env.lets[let.name] = lower_mono(let.mono, env)
            yield env

    def sides(self, env: Env, corrected: bool = False) -> Tuple[Side, Side]:
        eq = self.corrected if corrected else self.equation
        if eq is None:
            raise ValueError(f"{self.name} has no corrected form")
        return lower_expr(eq.lhs, env), lower_expr(eq.rhs, env)


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------


def _corpus_files(path: Optional[str] = None) -> List[Path]:
    spec = path if path is not None else os.environ.get(CORPUS_ENV)
    roots = [Path(p) for p in spec.split(os.pathsep) if p] if spec else [DATA_DIR]
    files: List[Path] = []
    for root in roots:
        if root.is_dir():
            files += sorted(root.glob("*.tf"))
        elif root.is_file():
            files.append(root)
        else:
            raise FileNotFoundError(f"corpus path {root} does not exist")
    return files


def load_identities(text: str, source: str = "") -> List[Identity]:
    ast = parse_file(text)
    return [Identity.from_block(b, source) for b in ast.blocks]


_CACHE: Dict[Tuple[str, ...], List[Identity]] = {}


def corpus_list(path: Optional[str] = None) -> List[Identity]:
    files = _corpus_files(path)
    key = tuple(str(f) for f in files) + tuple(str(f.stat().st_mtime_ns) for f in files)
    if key not in _CACHE:
        out: List[Identity] = []
        seen = set()
        for f in files:
            try:
                entries = load_identities(f.read_text(encoding="utf-8"), f.name)
            except DslError as err:
                raise DslError(f"{f}: {err}") from None
            for e in entries:
                if e.name in seen:
                    raise DslError(f"{f}: duplicate identity name {e.name!r}")
                seen.add(e.name)
                out.append(e)
        _CACHE[key] = out
    return list(_CACHE[key])


def lookup(name: str, path: Optional[str] = None) -> Identity:
    for e in corpus_list(path):
        if e.name == name:
            return e
    raise KeyError(f"no corpus entry named {name!r}")


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------


def _check(ident: Identity, order: Rat, corrected: bool):
    """First mismatch over all instances, as (Mismatch, params) or None."""
    for env in ident.instances():
        lhs, rhs = ident.sides(env, corrected)
        a = expand_side(lhs, order)
        b = expand_side(rhs, order)
        mm = a.first_mismatch(b, order)
        if a.order < order or b.order < order:
            raise ValueError("expansion came back at a lower order than requested")
        if mm is not None:
            params = tuple((p.name, env.params[p.name]) for p in ident.params)
            return Mismatch(*mm), params
    return None


def verify(ident: Identity, order=None) -> VerifyReport:
    """Expand both sides to ``order`` (default: the entry's hint) and compare exactly."""
    order = rat(ident.order_hint if order is None else order)
    start = time.perf_counter()
    status, mismatch, params, error = "pass", None, (), None
    try:
        literal = _check(ident, order, corrected=False)
        if literal is not None:
            mismatch, params = literal
            status = "fail"
            if ident.status == "paper-discrepancy":
                fixed = _check(ident, order, corrected=True)
                if fixed is None:
                    status = "paper-discrepancy"
                else:
                    error = "corrected form also fails at " + f"q^{_num(fixed[0].qexp)}"
        elif ident.corrected is not None:
            fixed = _check(ident, order, corrected=True)
            if fixed is not None:
                status = "fail"
                mismatch, params = fixed
                error = "corrected form fails"
    except (DslError, ValueError, ArithmeticError, KeyError) as err:
        status, error = "fail", f"{type(err).__name__}: {err}"
    millis = int((time.perf_counter() - start) * 1000)
    return VerifyReport(ident.name, order, status, mismatch, millis, error, params)


def _verify_job(args):
    ident, order = args
    return verify(ident, order)


def verify_all(order=None, path: Optional[str] = None, jobs: int = 1,
               names: Optional[Sequence[str]] = None) -> List[VerifyReport]:
    """One report per entry in corpus order; ``order=None`` uses each entry's hint."""
    entries = corpus_list(path)
    if names is not None:
        wanted = set(names)
        entries = [e for e in entries if e.name in wanted]
    work = [(e, order) for e in entries]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_verify_job, work))
    return [_verify_job(w) for w in work]


def summarize(reports: Iterable[VerifyReport]) -> Dict[str, int]:
    counts = {s: 0 for s in STATUSES}
    for r in reports:
        counts[r.status] += 1
    counts["total"] = sum(counts[s] for s in STATUSES)
    return counts
