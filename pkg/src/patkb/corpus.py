"""Patent extract data model: parsing, validation, CPC matching, jurisdiction filters.

A corpus is a set of patent family records seen at one office, read from a
UTF-8 line-delimited extract (one JSON object per line). Parsing is a single
streaming pass; a Corpus is immutable once built and safe to share across
threads.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import IO, Iterable, Iterator, Mapping

UNIVERSITY_SECTOR = "UNIVERSITY"

# Canonical key order for one extract line; also the strict-mode whitelist.
_RECORD_FIELDS = (
    "family_id",
    "office",
    "filing_year",
    "cpc_codes",
    "cited_family_ids",
    "npl_total",
    "npl_scientific",
    "sectors",
    "inventor_locations",
)
_OPTIONAL_FIELDS = frozenset({"filing_year"})
_LOCATION_FIELDS = ("lat", "lon", "country", "region")


class Office(str, Enum):
    EP = "EP"
    US = "US"


class JurisdictionRule(str, Enum):
    """Inventor-location sub-selection rules for reference-distance analyses."""

    HOME = "HOME"
    FOREIGN_US_IN_EP = "FOREIGN_US_IN_EP"
    FOREIGN_EP_IN_US = "FOREIGN_EP_IN_US"


class CorpusError(ValueError):
    """Invalid corpus content or configuration."""


class RecordError(CorpusError):
    """One extract line failed syntax or invariant validation."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


def normalize_cpc(code: str) -> str:
    """Uppercase a CPC symbol, trim it, and collapse internal whitespace."""
    return " ".join(code.upper().split())


def cpc_group(code: str) -> str:
    """Truncate a CPC symbol to its group: keep one digit past the slash.

    "Y02E 10/541" -> "Y02E 10/5"; symbols without a slash are returned
    normalized but untruncated ("Y02C" -> "Y02C").
    """
    norm = normalize_cpc(code)
    head, sep, tail = norm.partition("/")
    if not sep:
        return norm
    return head + "/" + tail[:1]


@dataclass(frozen=True)
class Location:
    lat: float
    lon: float
    country: str
    region: str | None = None


@dataclass(frozen=True)
class PatentRecord:
    """One DOCDB family as seen at one office."""

    family_id: str
    office: Office
    filing_year: int | None
    cpc_codes: tuple[str, ...]
    cited_family_ids: tuple[str, ...]
    npl_total: int
    npl_scientific: int
    sectors: frozenset[str]
    inventor_locations: tuple[Location, ...]


@dataclass(frozen=True)
class TechnologyDef:
    """A named technology identified by a set of CPC prefixes."""

    name: str
    short_name: str
    cpc_prefixes: tuple[str, ...]

    def __post_init__(self) -> None:
        prefixes = tuple(p for p in (normalize_cpc(p) for p in self.cpc_prefixes) if p)
        if not prefixes:
            raise CorpusError(f"technology {self.name!r}: no usable cpc_prefixes")
        object.__setattr__(self, "cpc_prefixes", prefixes)


@dataclass(frozen=True)
class Corpus:
    """Validated records of one office, keyed by family_id (insertion order kept)."""

    office: Office
    records: Mapping[str, PatentRecord]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PatentRecord]:
        return iter(self.records.values())

    def __contains__(self, family_id: str) -> bool:
        return family_id in self.records

    def get(self, family_id: str) -> PatentRecord | None:
        return self.records.get(family_id)


def _check(cond: bool, reason: str) -> None:
    if not cond:
        raise CorpusError(reason)


def _as_int(value: object, field_name: str, optional: bool = False) -> int | None:
    if value is None and optional:
        return None
    # bool is an int subclass; reject it explicitly
    _check(isinstance(value, int) and not isinstance(value, bool),
           f"{field_name} must be an integer")
    return value  # type: ignore[return-value]


def _location_from_obj(obj: object, idx: int, strict: bool) -> Location:
    _check(isinstance(obj, dict), f"inventor_locations[{idx}] must be an object")
    loc: dict = obj  # type: ignore[assignment]
    if strict:
        unknown = set(loc) - set(_LOCATION_FIELDS)
        _check(not unknown,
               f"inventor_locations[{idx}]: unknown keys {sorted(unknown)}")
    for key in ("lat", "lon", "country"):
        _check(key in loc, f"inventor_locations[{idx}] missing {key}")
    lat, lon = loc["lat"], loc["lon"]
    _check(isinstance(lat, (int, float)) and not isinstance(lat, bool)
           and -90.0 <= lat <= 90.0,
           f"inventor_locations[{idx}].lat out of bounds [-90, 90]")
    _check(isinstance(lon, (int, float)) and not isinstance(lon, bool)
           and -180.0 <= lon < 180.0,
           f"inventor_locations[{idx}].lon out of bounds [-180, 180)")
    country = loc["country"]
    _check(isinstance(country, str) and len(country) == 2 and country.isalpha()
           and country.isupper(),
           f"inventor_locations[{idx}].country must be a 2-letter uppercase code")
    region = loc.get("region")
    _check(region is None or isinstance(region, str),
           f"inventor_locations[{idx}].region must be a string")
    return Location(float(lat), float(lon), country, region)


def record_from_obj(obj: object, office: Office, strict: bool = False) -> PatentRecord:
    """Validate one decoded extract object into a PatentRecord."""
    _check(isinstance(obj, dict), "record must be a JSON object")
    rec: dict = obj  # type: ignore[assignment]
    missing = [f for f in _RECORD_FIELDS if f not in rec and f not in _OPTIONAL_FIELDS]
    _check(not missing, f"missing fields {missing}")
    if strict:
        unknown = set(rec) - set(_RECORD_FIELDS)
        _check(not unknown, f"unknown keys {sorted(unknown)}")

    family_id = rec["family_id"]
    _check(isinstance(family_id, str) and family_id != "", "family_id must be a non-empty string")

    rec_office = rec["office"]
    _check(rec_office in (Office.EP.value, Office.US.value),
           "office must be 'EP' or 'US'")
    _check(rec_office == office.value,
           f"office {rec_office!r} does not match corpus office {office.value!r}")

    filing_year = _as_int(rec.get("filing_year"), "filing_year", optional=True)

    codes = rec["cpc_codes"]
    _check(isinstance(codes, list) and all(isinstance(c, str) for c in codes),
           "cpc_codes must be a list of strings")

    cited = rec["cited_family_ids"]
    _check(isinstance(cited, list) and all(isinstance(c, str) for c in cited),
           "cited_family_ids must be a list of strings")
    _check(family_id not in cited, "cited_family_ids contains a self-citation")
    cited_dedup = tuple(dict.fromkeys(cited))

    npl_total = _as_int(rec["npl_total"], "npl_total")
    npl_scientific = _as_int(rec["npl_scientific"], "npl_scientific")
    _check(npl_total >= 0, "npl_total must be non-negative")
    _check(npl_scientific >= 0, "npl_scientific must be non-negative")
    _check(npl_scientific <= npl_total, "npl_scientific exceeds npl_total")

    sectors = rec["sectors"]
    _check(isinstance(sectors, list) and all(isinstance(s, str) for s in sectors),
           "sectors must be a list of strings")

    locs = rec["inventor_locations"]
    _check(isinstance(locs, list), "inventor_locations must be a list")
    locations = tuple(_location_from_obj(o, i, strict) for i, o in enumerate(locs))

    return PatentRecord(
        family_id=family_id,
        office=Office(rec_office),
        filing_year=filing_year,
        cpc_codes=tuple(codes),
        cited_family_ids=cited_dedup,
        npl_total=npl_total,
        npl_scientific=npl_scientific,
        sectors=frozenset(sectors),
        inventor_locations=locations,
    )


def parse_corpus(stream: Iterable[str] | IO[str], office: Office | str,
                 strict: bool = False) -> Corpus:
    """Parse a line-delimited extract into a validated Corpus.

    Empty lines are skipped. Any syntax error, invariant violation, or
    duplicate family_id raises RecordError carrying the 1-based line number.
    """
    office = Office(office)
    records: dict[str, PatentRecord] = {}
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(line_no, f"malformed record: {exc.msg}") from exc
        try:
            record = record_from_obj(obj, office, strict=strict)
        except RecordError:
            raise
        except CorpusError as exc:
            raise RecordError(line_no, str(exc)) from exc
        if record.family_id in records:
            raise RecordError(line_no, f"duplicate family_id {record.family_id!r}")
        records[record.family_id] = record
    return Corpus(office=office, records=records)


def _location_to_obj(loc: Location) -> dict:
    obj = {"lat": loc.lat, "lon": loc.lon, "country": loc.country}
    if loc.region is not None:
        obj["region"] = loc.region
    return obj


def serialize_record(record: PatentRecord) -> str:
    """One canonical extract line (fixed key order, sorted sectors)."""
    obj: dict = {"family_id": record.family_id, "office": record.office.value}
    if record.filing_year is not None:
        obj["filing_year"] = record.filing_year
    obj["cpc_codes"] = list(record.cpc_codes)
    obj["cited_family_ids"] = list(record.cited_family_ids)
    obj["npl_total"] = record.npl_total
    obj["npl_scientific"] = record.npl_scientific
    obj["sectors"] = sorted(record.sectors)
    obj["inventor_locations"] = [_location_to_obj(l) for l in record.inventor_locations]
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def serialize_corpus(corpus: Corpus) -> str:
    """Full extract text; parse_corpus(serialize_corpus(c)) round-trips byte-identically."""
    return "".join(serialize_record(r) + "\n" for r in corpus)


def match_technology(record: PatentRecord, tech: TechnologyDef) -> bool:
    """True iff any of the record's normalized CPC codes starts with a tech prefix."""
    for code in record.cpc_codes:
        norm = normalize_cpc(code)
        for prefix in tech.cpc_prefixes:
            if norm.startswith(prefix):
                return True
    return False


def technology_members(corpus: Corpus, tech: TechnologyDef) -> list[PatentRecord]:
    return [r for r in corpus if match_technology(r, tech)]


def jurisdiction_filter(corpus: Corpus, rule: JurisdictionRule | str,
                        europe: frozenset[str]) -> Corpus:
    """Sub-select records by inventor country.

    HOME keeps EP records with an inventor in the Europe set and US records
    with a US inventor; the FOREIGN rules select the cross-jurisdiction
    complements (EP records with a US inventor, US records with a Europe-set
    inventor) and reject a mismatched corpus office.
    """
    rule = JurisdictionRule(rule)
    if rule is JurisdictionRule.HOME:
        wanted = europe if corpus.office is Office.EP else frozenset({"US"})
    elif rule is JurisdictionRule.FOREIGN_US_IN_EP:
        if corpus.office is not Office.EP:
            raise CorpusError("rule FOREIGN_US_IN_EP requires an EP corpus")
        wanted = frozenset({"US"})
    elif rule is JurisdictionRule.FOREIGN_EP_IN_US:
        if corpus.office is not Office.US:
            raise CorpusError("rule FOREIGN_EP_IN_US requires a US corpus")
        wanted = europe
    else:  # pragma: no cover - enum is exhaustive
        raise CorpusError(f"unknown jurisdiction rule {rule!r}")
    kept = {
        fid: rec
        for fid, rec in corpus.records.items()
        if any(loc.country in wanted for loc in rec.inventor_locations)
    }
    return Corpus(office=corpus.office, records=kept)


def load_technology_defs(lines: Iterable[str]) -> list[TechnologyDef]:
    """Read technology definitions from CSV text (name, short_name, cpc_prefixes).

    cpc_prefixes holds one or more prefixes separated by ';'.
    """
    reader = csv.DictReader(lines)
    required = {"name", "short_name", "cpc_prefixes"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise CorpusError(f"technology file must have columns {sorted(required)}")
    defs: list[TechnologyDef] = []
    seen: set[str] = set()
    for row in reader:
        name, short = row["name"].strip(), row["short_name"].strip()
        if name in seen or short in seen:
            raise CorpusError(f"duplicate technology name {name!r}/{short!r}")
        seen.update({name, short})
        prefixes = tuple(p.strip() for p in row["cpc_prefixes"].split(";") if p.strip())
        defs.append(TechnologyDef(name=name, short_name=short, cpc_prefixes=prefixes))
    if not defs:
        raise CorpusError("technology file defines no technologies")
    return defs


def load_technology_defs_file(path: str) -> list[TechnologyDef]:
    with open(path, encoding="utf-8", newline="") as fh:
        return load_technology_defs(fh)


def default_technology_defs() -> list[TechnologyDef]:
    """The RET technology set shipped with the package."""
    text = resources.files("patkb.data").joinpath("technologies.csv").read_text("utf-8")
    return load_technology_defs(text.splitlines())


def load_country_set(lines: Iterable[str]) -> frozenset[str]:
    codes: set[str] = set()
    for raw in lines:
        code = raw.strip().upper()
        if not code or code.startswith("#"):
            continue
        if len(code) != 2 or not code.isalpha():
            raise CorpusError(f"invalid country code {raw.strip()!r}")
        codes.add(code)
    if not codes:
        raise CorpusError("country set is empty")
    return frozenset(codes)


def load_country_set_file(path: str) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return load_country_set(fh)


def default_europe_set() -> frozenset[str]:
    """EPO member states, the default 'Europe' for jurisdiction filtering."""
    text = resources.files("patkb.data").joinpath("europe.txt").read_text("utf-8")
    return load_country_set(text.splitlines())
