"""Surjections A -> B, their fibres and sections."""

import itertools
import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

from ..errors import InputError
from ..core.measure import Configuration

logger = logging.getLogger(__name__)

Section = Tuple[int, ...]


@dataclass(frozen=True)
class FibreMap:
    """A surjection pi from A = {0..a_count-1} onto B = {0..b_count-1}.

    `section`, when given, is the distinguished section used by the main
    coupling construction: section[b] is a site of the fibre of b.
    """
    a_count: int
    b_count: int
    pi: Tuple[int, ...]
    section: Optional[Section] = None

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(int(b) for b in self.pi))
        if self.a_count < 1 or self.b_count < 1:
            raise InputError("A and B must be nonempty")
        if len(self.pi) != self.a_count:
            raise InputError(f"pi has {len(self.pi)} entries for |A| = {self.a_count}")
        if any(not 0 <= b < self.b_count for b in self.pi):
            raise InputError("pi maps outside B")
        if set(self.pi) != set(range(self.b_count)):
            missing = sorted(set(range(self.b_count)) - set(self.pi))
            raise InputError(f"pi is not surjective; missing {missing}")
        if self.section is not None:
            section = tuple(int(a) for a in self.section)
            object.__setattr__(self, "section", section)
            if not self.is_section(section):
                raise InputError(f"{section} is not a section of pi")

    def fibre(self, b: int) -> Tuple[int, ...]:
        """Sites of A above b, in increasing order."""
        if not 0 <= b < self.b_count:
            raise InputError(f"Unknown column {b}")
        return tuple(a for a in range(self.a_count) if self.pi[a] == b)

    @property
    def fibres(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(self.fibre(b) for b in range(self.b_count))

    def is_section(self, choice: Sequence[int]) -> bool:
        return (
            len(choice) == self.b_count
            and all(0 <= a < self.a_count and self.pi[a] == b for b, a in enumerate(choice))
        )

    def section_count(self) -> int:
        count = 1
        for fibre in self.fibres:
            count *= len(fibre)
        return count

    def sections(self) -> Iterator[Section]:
        """All sections, in lexicographic order of the fibre choices."""
        return itertools.product(*self.fibres)

    def require_section(self) -> Section:
        if self.section is None:
            raise InputError("A distinguished section is required")
        return self.section

    def with_section(self, section: Sequence[int]) -> "FibreMap":
        return FibreMap(self.a_count, self.b_count, self.pi, tuple(section))

    def outside(self, b: int) -> Tuple[int, ...]:
        """Sites of A not above b."""
        return tuple(a for a in range(self.a_count) if self.pi[a] != b)

    def column_max(self, x: Configuration) -> Configuration:
        """Per-fibre maximum of a configuration on A."""
        top = [0] * self.b_count
        for a, label in enumerate(x):
            b = self.pi[a]
            if label > top[b]:
                top[b] = label
        return tuple(top)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"A": self.a_count, "B": self.b_count, "pi": list(self.pi)}
        if self.section is not None:
            data["section"] = list(self.section)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FibreMap":
        try:
            section = data.get("section")
            return cls(
                int(data["A"]),
                int(data["B"]),
                tuple(data["pi"]),
                tuple(section) if section is not None else None,
            )
        except (KeyError, TypeError) as e:
            raise InputError(f"Malformed fibre map: {e}") from e

    @classmethod
    def from_fibre_sizes(cls, sizes: Sequence[int], section: Optional[Sequence[int]] = None) -> "FibreMap":
        """Fibres laid out consecutively: sizes (2, 3) gives pi = (0, 0, 1, 1, 1).

        `section` here gives positions within each fibre, not sites.
        """
        pi = tuple(b for b, size in enumerate(sizes) for _ in range(size))
        pm = cls(len(pi), len(sizes), pi)
        if section is not None:
            pm = pm.with_section(tuple(pm.fibre(b)[j] for b, j in enumerate(section)))
        return pm


def load_fibre_map(path: str) -> FibreMap:
    try:
        with open(path) as f:
            return FibreMap.from_dict(json.load(f))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read fibre map file {path}: {e}") from e
