"""Certification reports shared by all checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Failure:
    identity: str
    where: str
    residual: str

    def as_dict(self) -> dict:
        return {"identity": self.identity, "where": self.where, "residual": self.residual}


@dataclass
class CertReport:
    """Outcome of a batch of exact identity checks; ``ok`` iff no failures."""

    name: str = ""
    checked: int = 0
    failures: list[Failure] = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok

    def record(self, identity: str, where: str, residual) -> bool:
        """Count one check; log a failure when the residual is nonzero."""
        self.checked += 1
        zero = residual.is_zero() if hasattr(residual, "is_zero") else not residual
        if not zero:
            self.failures.append(Failure(identity, where, str(residual)))
            return False
        return True

    def require(self, identity: str, where: str, condition: bool, detail: str = "") -> bool:
        self.checked += 1
        if not condition:
            self.failures.append(Failure(identity, where, detail or "false"))
        return condition

    def merge(self, other: "CertReport", prefix: str = "") -> "CertReport":
        self.checked += other.checked
        for f in other.failures:
            self.failures.append(Failure(prefix + f.identity, f.where, f.residual))
        return self

    def failed_identities(self) -> set[str]:
        return {f.identity for f in self.failures}

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "checked": self.checked,
            "failures": [f.as_dict() for f in self.failures],
            **({"info": self.info} if self.info else {}),
        }

    def __str__(self):
        head = f"{self.name or 'report'}: {'ok' if self.ok else 'FAIL'} ({self.checked} checks)"
        lines = [head] + [f"  {f.identity} @ {f.where}: {f.residual}" for f in self.failures[:20]]
        return "\n".join(lines)
