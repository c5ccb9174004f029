"""Parsers for the offline dataset formats and the OLTP transaction stream.

Three inputs are understood:

* the UCI-style credit summary file (whitespace-separated attribute codes
  plus a trailing class digit, one account per line),
* a deliberate subset of ARFF (nominal and numeric attributes only),
* the line-delimited JSON transaction format (one object per line).
"""

from __future__ import annotations

import datetime as dt
import io
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Optional, Sequence, Union

from .errors import ParseError

CONTEXT_FLAGS = frozenset(
    {"address_change", "job_switch", "out_of_country", "foreign_worker", "air_ticket_purchase"}
)


@dataclass(frozen=True)
class AttributeSpec:
    """One dataset column: nominal with a declared domain, or numeric."""

    name: str
    kind: str  # "nominal" | "numeric"
    domain: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("nominal", "numeric"):
            raise ValueError(f"unknown attribute kind: {self.kind!r}")
        if self.kind == "nominal":
            if not self.domain:
                raise ValueError(f"nominal attribute {self.name!r} has empty domain")
            if len(set(self.domain)) != len(self.domain):
                raise ValueError(f"nominal attribute {self.name!r} has duplicate domain values")
        elif self.domain:
            raise ValueError(f"numeric attribute {self.name!r} cannot declare a domain")

    @property
    def is_nominal(self) -> bool:
        return self.kind == "nominal"


@dataclass
class Dataset:
    """A fully typed table of instances sharing one attribute schema."""

    name: str
    attributes: list[AttributeSpec]
    rows: list[tuple]
    class_attribute: int = -1

    def __post_init__(self):
        if self.class_attribute < 0:
            self.class_attribute += len(self.attributes)
        spec = self.attributes[self.class_attribute]
        if not spec.is_nominal or len(spec.domain) < 2:
            raise ValueError("class attribute must be nominal with >= 2 declared labels")
        n = len(self.attributes)
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise ValueError(f"row {i} has {len(row)} values, schema has {n}")

    @property
    def class_labels(self) -> tuple[str, ...]:
        return self.attributes[self.class_attribute].domain

    @property
    def class_values(self) -> list[str]:
        c = self.class_attribute
        return [row[c] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def replace_rows(self, rows: list[tuple]) -> "Dataset":
        return Dataset(self.name, self.attributes, rows, self.class_attribute)


@dataclass(frozen=True)
class Transaction:
    """One OLTP event, amounts in integer minor units (cents)."""

    tid: str
    account_id: str
    date: dt.date
    description: str
    amount: int
    category: str
    location: Optional[tuple[float, float, str]] = None  # (lat, lon, country code)
    context_flags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.amount < 0:
            raise ValueError("amount must be >= 0")
        if not self.category:
            raise ValueError("category must be non-empty")
        unknown = self.context_flags - CONTEXT_FLAGS
        if unknown:
            raise ValueError(f"unknown context flags: {sorted(unknown)}")


# --------------------------------------------------------------------------
# Credit summary file (UCI format)
# --------------------------------------------------------------------------

# Published schema of the 20-attribute credit summary file: qualitative
# attributes carry their code domains, the class digit is 1=good / 2=bad.
GERMAN_CREDIT_ATTRIBUTES: list[AttributeSpec] = [
    AttributeSpec("status of existing checking account", "nominal", ("A11", "A12", "A13", "A14")),
    AttributeSpec("duration in month", "numeric"),
    AttributeSpec("credit history", "nominal", ("A30", "A31", "A32", "A33", "A34")),
    AttributeSpec(
        "purpose",
        "nominal",
        ("A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410"),
    ),
    AttributeSpec("credit amount", "numeric"),
    AttributeSpec("savings account and bonds", "nominal", ("A61", "A62", "A63", "A64", "A65")),
    AttributeSpec("present employment since", "nominal", ("A71", "A72", "A73", "A74", "A75")),
    AttributeSpec("installment rate in percentage of disposable income", "numeric"),
    AttributeSpec("personal status and sex", "nominal", ("A91", "A92", "A93", "A94", "A95")),
    AttributeSpec("other debtors or guarantors", "nominal", ("A101", "A102", "A103")),
    AttributeSpec("present residence since", "numeric"),
    AttributeSpec("property", "nominal", ("A121", "A122", "A123", "A124")),
    AttributeSpec("age in years", "numeric"),
    AttributeSpec("other installment plans", "nominal", ("A141", "A142", "A143")),
    AttributeSpec("housing", "nominal", ("A151", "A152", "A153")),
    AttributeSpec("number of existing credits at this bank", "numeric"),
    AttributeSpec("job", "nominal", ("A171", "A172", "A173", "A174")),
    AttributeSpec("number of people being liable to provide maintenance for", "numeric"),
    AttributeSpec("telephone", "nominal", ("A191", "A192")),
    AttributeSpec("foreign worker", "nominal", ("A201", "A202")),
    AttributeSpec("class", "nominal", ("good", "bad")),
]

_CLASS_DIGITS = {"1": "good", "2": "bad"}


def _as_text_lines(source: Union[bytes, str, io.IOBase, Iterable[str]]) -> Iterable[str]:
    if isinstance(source, bytes):
        return source.decode("utf-8").splitlines()
    if isinstance(source, str):
        return source.splitlines()
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return data.splitlines()
    return source


def parse_german_credit(source) -> Dataset:
    """Parse the whitespace-separated credit summary file into a Dataset.

    Every line must carry 20 attribute codes plus the class digit.
    Raises ParseError naming the offending line for wrong field counts,
    unknown nominal codes, or non-numeric values in numeric columns.
    """
    attrs = GERMAN_CREDIT_ATTRIBUTES
    n_fields = len(attrs)  # 20 attributes + class
    rows: list[tuple] = []
    for line_no, line in enumerate(_as_text_lines(source), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != n_fields:
            raise ParseError(f"expected {n_fields} fields, found {len(fields)}", line=line_no)
        values = []
        for spec, raw in zip(attrs[:-1], fields[:-1]):
            if spec.is_nominal:
                if raw not in spec.domain:
                    raise ParseError(
                        f"unknown code {raw!r} for attribute {spec.name!r}", line=line_no
                    )
                values.append(raw)
            else:
                try:
                    values.append(float(raw))
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {raw!r} for attribute {spec.name!r}", line=line_no
                    ) from None
        label = _CLASS_DIGITS.get(fields[-1])
        if label is None:
            raise ParseError(f"unknown class digit {fields[-1]!r}", line=line_no)
        values.append(label)
        rows.append(tuple(values))
    return Dataset("german_credit", list(attrs), rows)


# --------------------------------------------------------------------------
# ARFF subset
# --------------------------------------------------------------------------

_ARFF_NUMERIC_KINDS = {"numeric", "real", "integer"}


def _strip_quotes(token: str) -> str:
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _split_csv(line: str) -> list[str]:
    """Split a data row on commas, honoring single/double quotes."""
    out, buf, quote = [], [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch == ",":
            out.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    out.append("".join(buf).strip())
    return out


def parse_arff(source, class_attribute: Optional[str] = None) -> Dataset:
    """Parse the nominal/numeric subset of ARFF into a Dataset.

    Header keywords are case-insensitive and '%' comments are skipped.
    String, date, and relational attributes, sparse rows, and missing
    values ('?') are rejected with an "unsupported ARFF feature" error.
    The last attribute is the class unless `class_attribute` names one.
    """
    relation = ""
    attrs: list[AttributeSpec] = []
    rows: list[tuple] = []
    in_data = False
    for line_no, raw_line in enumerate(_as_text_lines(source), start=1):
        line = raw_line.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data and line.startswith("@"):
            keyword, _, rest = line.partition(" ")
            keyword = keyword.lower()
            rest = rest.strip()
            if keyword == "@relation":
                relation = _strip_quotes(rest)
            elif keyword == "@attribute":
                attrs.append(_parse_arff_attribute(rest, line_no))
            elif keyword == "@data":
                if not attrs:
                    raise ParseError("@data before any @attribute declaration", line=line_no)
                in_data = True
            else:
                raise ParseError(f"unsupported ARFF feature: {keyword}", line=line_no)
            continue
        if not in_data:
            raise ParseError("data row before @data section", line=line_no)
        if line.startswith("{"):
            raise ParseError("unsupported ARFF feature: sparse rows", line=line_no)
        fields = _split_csv(line)
        if len(fields) != len(attrs):
            raise ParseError(
                f"expected {len(attrs)} values, found {len(fields)}", line=line_no
            )
        values = []
        for spec, token in zip(attrs, fields):
            if token == "?":
                raise ParseError("unsupported ARFF feature: missing values", line=line_no)
            if spec.is_nominal:
                if token not in spec.domain:
                    raise ParseError(
                        f"value {token!r} not in domain of attribute {spec.name!r}", line=line_no
                    )
                values.append(token)
            else:
                try:
                    values.append(float(token))
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {token!r} for attribute {spec.name!r}", line=line_no
                    ) from None
        rows.append(tuple(values))
    if not in_data:
        raise ParseError("missing @data section")
    class_index = len(attrs) - 1
    if class_attribute is not None:
        names = [a.name for a in attrs]
        if class_attribute not in names:
            raise ParseError(f"class attribute {class_attribute!r} not declared")
        class_index = names.index(class_attribute)
    return Dataset(relation or "arff", attrs, rows, class_index)


def _parse_arff_attribute(rest: str, line_no: int) -> AttributeSpec:
    m = re.match(r"^('(?:[^']*)'|\"(?:[^\"]*)\"|\S+)\s+(.*)$", rest)
    if not m:
        raise ParseError("malformed @attribute declaration", line=line_no)
    name = _strip_quotes(m.group(1))
    kind = m.group(2).strip()
    if kind.startswith("{"):
        if not kind.endswith("}"):
            raise ParseError("unterminated nominal domain", line=line_no)
        domain = tuple(_strip_quotes(v.strip()) for v in _split_csv(kind[1:-1]))
        if any(not v for v in domain):
            raise ParseError("empty nominal value", line=line_no)
        return AttributeSpec(name, "nominal", domain)
    if kind.lower() in _ARFF_NUMERIC_KINDS:
        return AttributeSpec(name, "numeric")
    raise ParseError(f"unsupported ARFF feature: attribute kind {kind!r}", line=line_no)


def _format_arff_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if any(c in text for c in " ,{}%'\""):
        return "'" + text.replace("'", "\\'") + "'"
    return text


def dump_arff(dataset: Dataset) -> str:
    """Emit a Dataset in the ARFF subset accepted by parse_arff."""
    lines = [f"@relation {_format_arff_value(dataset.name)}", ""]
    for spec in dataset.attributes:
        if spec.is_nominal:
            domain = ",".join(_format_arff_value(v) for v in spec.domain)
            lines.append(f"@attribute {_format_arff_value(spec.name)} {{{domain}}}")
        else:
            lines.append(f"@attribute {_format_arff_value(spec.name)} numeric")
    lines.append("")
    lines.append("@data")
    for row in dataset.rows:
        lines.append(",".join(_format_arff_value(v) for v in row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Transaction stream (line-delimited JSON)
# --------------------------------------------------------------------------

_REQUIRED_TXN_FIELDS = ("tid", "account", "date", "description", "amount", "category")


def parse_money(text: str) -> int:
    """Parse a decimal money string (e.g. "237.90") into integer minor units."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ParseError(f"unparseable amount {text!r}") from None
    cents = value.scaleb(2)
    if cents != cents.to_integral_value():
        raise ParseError(f"amount {text!r} has more than 2 decimal places")
    if cents < 0:
        raise ParseError(f"amount {text!r} is negative")
    return int(cents)


def format_money(minor_units: int) -> str:
    sign = "-" if minor_units < 0 else ""
    q, r = divmod(abs(minor_units), 100)
    return f"{sign}{q}.{r:02d}"


def parse_transaction_line(line: str) -> Transaction:
    """Parse one JSON transaction record into a validated Transaction."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ParseError("transaction record must be a JSON object")
    for key in _REQUIRED_TXN_FIELDS:
        if key not in obj:
            raise ParseError(f"missing required field {key!r}")
    try:
        date = dt.date.fromisoformat(obj["date"])
    except (TypeError, ValueError):
        raise ParseError(f"unparseable date {obj['date']!r}") from None
    amount = parse_money(str(obj["amount"]))
    location = None
    if obj.get("location") is not None:
        loc = obj["location"]
        if not isinstance(loc, dict) or not {"lat", "lon", "country"} <= set(loc):
            raise ParseError("location must carry lat, lon, and country")
        location = (float(loc["lat"]), float(loc["lon"]), str(loc["country"]))
    flags = frozenset(obj.get("context") or ())
    unknown = flags - CONTEXT_FLAGS
    if unknown:
        raise ParseError(f"unknown context flags: {sorted(unknown)}")
    if not obj["category"]:
        raise ParseError("category must be non-empty")
    return Transaction(
        tid=str(obj["tid"]),
        account_id=str(obj["account"]),
        date=date,
        description=str(obj["description"]),
        amount=amount,
        category=str(obj["category"]),
        location=location,
        context_flags=flags,
    )


def transaction_to_line(txn: Transaction) -> str:
    """Serialize a Transaction back to its one-line JSON form."""
    obj: dict = {
        "tid": txn.tid,
        "account": txn.account_id,
        "date": txn.date.isoformat(),
        "description": txn.description,
        "amount": format_money(txn.amount),
        "category": txn.category,
    }
    if txn.location is not None:
        lat, lon, country = txn.location
        obj["location"] = {"lat": lat, "lon": lon, "country": country}
    if txn.context_flags:
        obj["context"] = sorted(txn.context_flags)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def read_transactions(source) -> Iterable[tuple[int, Union[Transaction, ParseError]]]:
    """Yield (line_no, Transaction | ParseError) for each non-empty line."""
    for line_no, line in enumerate(_as_text_lines(source), start=1):
        if not line.strip():
            continue
        try:
            yield line_no, parse_transaction_line(line)
        except ParseError as exc:
            yield line_no, ParseError(str(exc), line=line_no)
