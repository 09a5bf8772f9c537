"""Directed family-to-family citation graph and internal-reference counting.

Edges only exist between families present in the corpus; references to
unknown families are tallied as dangling. Counting supports two scopes:
membership of a technology definition, or sharing a CPC group with the
citing patent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterator, Mapping

from .corpus import (
    Corpus,
    CorpusError,
    PatentRecord,
    TechnologyDef,
    cpc_group,
    match_technology,
)


class ScopeKind(Enum):
    TECHNOLOGY = "technology"
    CPC_GROUP = "cpc_group"


@dataclass(frozen=True)
class ReferenceScope:
    kind: ScopeKind
    technology: TechnologyDef | None = None

    def __post_init__(self) -> None:
        if self.kind is ScopeKind.TECHNOLOGY and self.technology is None:
            raise CorpusError("TECHNOLOGY scope requires a technology definition")

    @classmethod
    def for_technology(cls, tech: TechnologyDef) -> "ReferenceScope":
        return cls(ScopeKind.TECHNOLOGY, tech)

    @classmethod
    def cpc_groups(cls) -> "ReferenceScope":
        return cls(ScopeKind.CPC_GROUP)


@dataclass(frozen=True)
class CitationGraph:
    """Deduplicated in-corpus citation edges, citing -> cited."""

    nodes: frozenset[str]
    out_edges: Mapping[str, tuple[str, ...]]
    dangling_count: int

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.out_edges.values())

    def edges(self) -> Iterator[tuple[str, str]]:
        for citing, cited in self.out_edges.items():
            for target in cited:
                yield citing, target


def build_graph(corpus: Corpus) -> CitationGraph:
    """One node per record; edges only to in-corpus targets; dangling counted."""
    nodes = frozenset(corpus.records)
    out_edges: dict[str, tuple[str, ...]] = {}
    dangling = 0
    for record in corpus:
        cited = tuple(dict.fromkeys(record.cited_family_ids))
        kept = tuple(c for c in cited if c in nodes)
        dangling += len(cited) - len(kept)
        out_edges[record.family_id] = kept
    return CitationGraph(nodes=nodes, out_edges=out_edges, dangling_count=dangling)


def internal_reference_count(patent: PatentRecord, graph: CitationGraph,
                             scope: ReferenceScope, corpus: Corpus) -> int:
    """Cited in-corpus patents that fall inside the scope of the citing patent."""
    if patent.family_id not in corpus:
        raise CorpusError(f"patent {patent.family_id!r} not in corpus")
    cited_ids = graph.out_edges.get(patent.family_id, ())
    if scope.kind is ScopeKind.TECHNOLOGY:
        tech = scope.technology
        assert tech is not None
        return sum(1 for cid in cited_ids
                   if match_technology(corpus.records[cid], tech))
    own_groups = {cpc_group(c) for c in patent.cpc_codes}
    count = 0
    for cid in cited_ids:
        target = corpus.records[cid]
        if any(cpc_group(c) in own_groups for c in target.cpc_codes):
            count += 1
    return count


def write_edge_csv(graph: CitationGraph, out: IO[str]) -> None:
    """Edge-list export: citing_family_id, cited_family_id."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["citing_family_id", "cited_family_id"])
    for citing, cited in graph.edges():
        writer.writerow([citing, cited])
