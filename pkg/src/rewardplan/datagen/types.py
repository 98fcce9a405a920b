"""Data-pipeline value types and the synthesis accounting report."""

from __future__ import annotations

from dataclasses import dataclass

PROVENANCES = ("llm", "template")
NEGATIVE_KINDS = ("perturb_action", "truncate", "diverge_random")


@dataclass(frozen=True)
class RawInstruction:
    text: str
    provenance: str = "template"
    id: str = ""

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("instruction text must be non-empty")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")


@dataclass(frozen=True)
class RefinedInstruction:
    text: str
    source_id: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("refined text must be non-empty")


@dataclass(frozen=True)
class NegativeStrategy:
    kind: str
    index: int | None = None  # perturb/diverge position; None = seeded choice

    def __post_init__(self) -> None:
        if self.kind not in NEGATIVE_KINDS:
            raise ValueError(f"kind must be one of {NEGATIVE_KINDS}")


@dataclass
class SynthesisReport:
    """Pipeline accounting; every item is conserved stage to stage."""

    instructions_proposed: int = 0
    collection_failures: int = 0
    trajectories_collected: int = 0
    refinement_failures: int = 0
    instructions_refined: int = 0
    negative_failures: int = 0
    negatives_built: int = 0
    duplicates_dropped: int = 0
    validation_rejects: int = 0
    pairs_emitted: int = 0
    token_estimate: int = 0

    def check(self) -> None:
        """Raise if any stage lost or invented items."""
        stages = (
            ("proposed", self.instructions_proposed,
             self.trajectories_collected + self.collection_failures),
            ("collected", self.trajectories_collected,
             self.instructions_refined + self.refinement_failures),
            ("refined", self.instructions_refined,
             self.negatives_built + self.negative_failures),
            ("negatives", self.negatives_built,
             self.pairs_emitted + self.duplicates_dropped + self.validation_rejects),
        )
        for name, total, parts in stages:
            if total != parts:
                raise AssertionError(f"{name} count {total} != accounted {parts}")
        if self.pairs_emitted > self.trajectories_collected:
            raise AssertionError("more pairs emitted than trajectories collected")
