"""Analyticity and cumulativeness indicators at patent and technology level.

All technology-level values are unweighted means over member patents.
Patents whose fraction denominator is zero are excluded from fraction means
and reported as such; a zero numerator with a nonzero denominator counts as
a plain zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from typing import IO, Sequence

from .citegraph import CitationGraph, ReferenceScope, internal_reference_count
from .corpus import (
    UNIVERSITY_SECTOR,
    Corpus,
    CorpusError,
    PatentRecord,
    TechnologyDef,
    technology_members,
)


class UndefinedIndicatorError(ValueError):
    """No patent in the set has a defined value for the indicator."""


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def science_dependence(patents: Sequence[PatentRecord]) -> tuple[float, float]:
    """Mean and population std of scientific NPL references per patent."""
    if not patents:
        raise UndefinedIndicatorError("science dependence of an empty patent set")
    return _mean_std([float(p.npl_scientific) for p in patents])


def sdf_patent(patent: PatentRecord) -> float | None:
    """Scientific share of all in-document references; None when there are none."""
    denominator = len(patent.cited_family_ids) + patent.npl_total
    if denominator == 0:
        return None
    return patent.npl_scientific / denominator


def sdf_technology(patents: Sequence[PatentRecord]) -> tuple[float, float, int]:
    """Mean/std of defined per-patent sdf values plus the defined count."""
    values = [v for p in patents if (v := sdf_patent(p)) is not None]
    if not values:
        raise UndefinedIndicatorError("sdf undefined for every patent in the set")
    mean, std = _mean_std(values)
    return mean, std, len(values)


def university_fraction(patents: Sequence[PatentRecord]) -> tuple[float, float]:
    """Share of patents with a university-sector allocation (and Bernoulli std)."""
    if not patents:
        raise UndefinedIndicatorError("university fraction of an empty patent set")
    flags = [1.0 if UNIVERSITY_SECTOR in p.sectors else 0.0 for p in patents]
    return _mean_std(flags)


def internal_dependence(patents: Sequence[PatentRecord], graph: CitationGraph,
                        scope: ReferenceScope, corpus: Corpus) -> tuple[float, float]:
    """Mean and population std of internal references per patent."""
    if not patents:
        raise UndefinedIndicatorError("internal dependence of an empty patent set")
    counts = [float(internal_reference_count(p, graph, scope, corpus))
              for p in patents]
    return _mean_std(counts)


def idf_patent(patent: PatentRecord, graph: CitationGraph, scope: ReferenceScope,
               corpus: Corpus) -> float | None:
    """Internal share of in-corpus patent references; None when there are none."""
    cited = graph.out_edges.get(patent.family_id)
    if cited is None:
        raise CorpusError(f"patent {patent.family_id!r} not in graph")
    if not cited:
        return None
    return internal_reference_count(patent, graph, scope, corpus) / len(cited)


def idf_technology(patents: Sequence[PatentRecord], graph: CitationGraph,
                   scope: ReferenceScope, corpus: Corpus) -> tuple[float, float, int]:
    """Mean/std of defined per-patent idf values plus the defined count."""
    values = [v for p in patents
              if (v := idf_patent(p, graph, scope, corpus)) is not None]
    if not values:
        raise UndefinedIndicatorError("idf undefined for every patent in the set")
    mean, std = _mean_std(values)
    return mean, std, len(values)


def relative_internal_dependence(patents: Sequence[PatentRecord],
                                 graph: CitationGraph, scope: ReferenceScope,
                                 corpus: Corpus) -> float:
    """Internal references per patent squared: internal dependence / n_patents."""
    mean, _ = internal_dependence(patents, graph, scope, corpus)
    return mean / len(patents)


@dataclass(frozen=True)
class IndicatorRow:
    """One technology's indicator values (None where undefined for every patent)."""

    n_patents: int
    sd: float
    sd_std: float
    sdf: float | None
    sdf_std: float | None
    sdf_defined: int
    uf: float
    uf_std: float
    id: float
    id_std: float
    idf: float | None
    idf_std: float | None
    idf_defined: int
    rid: float


@dataclass(frozen=True)
class IndicatorTable:
    rows: dict[str, IndicatorRow]  # keyed by technology short_name


def technology_row(patents: Sequence[PatentRecord], graph: CitationGraph,
                   scope: ReferenceScope, corpus: Corpus) -> IndicatorRow:
    if not patents:
        raise UndefinedIndicatorError("indicator row of an empty patent set")
    sd, sd_std = science_dependence(patents)
    try:
        sdf, sdf_std, sdf_defined = sdf_technology(patents)
    except UndefinedIndicatorError:
        sdf, sdf_std, sdf_defined = None, None, 0
    uf, uf_std = university_fraction(patents)
    id_mean, id_std = internal_dependence(patents, graph, scope, corpus)
    try:
        idf, idf_std, idf_defined = idf_technology(patents, graph, scope, corpus)
    except UndefinedIndicatorError:
        idf, idf_std, idf_defined = None, None, 0
    return IndicatorRow(
        n_patents=len(patents),
        sd=sd, sd_std=sd_std,
        sdf=sdf, sdf_std=sdf_std, sdf_defined=sdf_defined,
        uf=uf, uf_std=uf_std,
        id=id_mean, id_std=id_std,
        idf=idf, idf_std=idf_std, idf_defined=idf_defined,
        rid=id_mean / len(patents),
    )


def technology_indicator_table(corpus: Corpus, graph: CitationGraph,
                               technologies: Sequence[TechnologyDef]) -> IndicatorTable:
    """One row per technology with members, internal scope = the technology itself."""
    rows: dict[str, IndicatorRow] = {}
    for tech in technologies:
        members = technology_members(corpus, tech)
        if not members:
            continue
        scope = ReferenceScope.for_technology(tech)
        rows[tech.short_name] = technology_row(members, graph, scope, corpus)
    return IndicatorTable(rows=rows)


_CSV_COLUMNS = ("tech",) + tuple(f.name for f in fields(IndicatorRow))


def write_indicator_csv(table: IndicatorTable, out: IO[str]) -> None:
    """Fixed column order; floats rendered with 6 significant digits."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for tech, row in table.rows.items():
        cells: list[str] = [tech]
        for f in fields(IndicatorRow):
            value = getattr(row, f.name)
            if value is None:
                cells.append("")
            elif isinstance(value, int):
                cells.append(str(value))
            else:
                cells.append(format(value, ".6g"))
        writer.writerow(cells)
