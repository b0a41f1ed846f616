"""Minimal deterministic writer for the CPLEX LP text format."""

from __future__ import annotations

from dataclasses import dataclass, field

_MAX_LINE = 500


def _term(coef: int, name: str, first: bool) -> str:
    if coef == 0:
        return ""
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    body = name if mag == 1 else f"{mag} {name}"
    return f"{sign} {body}" if sign else body


def format_expr(terms: list[tuple[int, str]], constant: int = 0) -> str:
    parts = []
    for coef, name in terms:
        t = _term(coef, name, not parts)
        if t:
            parts.append(t)
    if constant:
        if parts:
            parts.append(f"{'+' if constant > 0 else '-'} {abs(constant)}")
        else:
            parts.append(str(constant))
    if not parts:
        parts.append("0")
    return " ".join(parts)


def _wrap(prefix: str, text: str) -> list[str]:
    # LP readers cap line length; break between tokens
    out = []
    line = prefix
    for tok in text.split(" "):
        if len(line) + len(tok) + 1 > _MAX_LINE and line.strip():
            out.append(line.rstrip())
            line = "   "
        line += tok + " "
    out.append(line.rstrip())
    return out


@dataclass
class LPModel:
    name: str
    sense: str  # "minimize" | "maximize"
    objective: list[tuple[int, str]] = field(default_factory=list)
    objective_constant: int = 0
    rows: list[tuple[str, list[tuple[int, str]], str, int]] = field(default_factory=list)
    bounds: list[tuple[str, int | None, int | None]] = field(default_factory=list)
    binaries: list[str] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)

    def add_row(self, name: str, terms, op: str, rhs: int) -> None:
        assert op in ("<=", ">=", "=")
        self.rows.append((name, list(terms), op, int(rhs)))

    def add_bound(self, var: str, lo: int | None, hi: int | None) -> None:
        self.bounds.append((var, lo, hi))

    def variables(self) -> list[str]:
        seen = {}
        for _, name in self.objective:
            seen.setdefault(name, None)
        for _, terms, _, _ in self.rows:
            for _, name in terms:
                seen.setdefault(name, None)
        for var, _, _ in self.bounds:
            seen.setdefault(var, None)
        for var in self.binaries:
            seen.setdefault(var, None)
        return list(seen)

    def render(self) -> str:
        lines = [f"\\ {self.name}"]
        lines += [f"\\ {c}" for c in self.comments]
        lines.append("Maximize" if self.sense == "maximize" else "Minimize")
        lines += _wrap(" obj: ", format_expr(self.objective, self.objective_constant))
        lines.append("Subject To")
        for name, terms, op, rhs in self.rows:
            lines += _wrap(f" {name}: ", f"{format_expr(terms)} {op} {rhs}")
        if self.bounds:
            lines.append("Bounds")
            for var, lo, hi in self.bounds:
                if lo is not None and hi is not None:
                    lines.append(f" {lo} <= {var} <= {hi}")
                elif lo is not None:
                    lines.append(f" {var} >= {lo}")
                elif hi is not None:
                    lines.append(f" -inf <= {var} <= {hi}")
                else:
                    lines.append(f" {var} free")
        if self.binaries:
            lines.append("Binaries")
            lines += _wrap(" ", " ".join(self.binaries))
        lines.append("End")
        return "\n".join(lines) + "\n"
