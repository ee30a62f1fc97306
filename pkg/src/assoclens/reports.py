"""Tabular stage artifacts (TSV or JSON lines) with a provenance header."""

from __future__ import annotations

import json

PROVENANCE_PREFIX = "# assoclens"


def provenance_line(prov: dict) -> str:
    return PROVENANCE_PREFIX + "".join(f" {k}={prov[k]}" for k in sorted(prov))


def parse_provenance(line: str) -> dict:
    body = line[len(PROVENANCE_PREFIX):].split()
    return dict(item.split("=", 1) for item in body)


def _cell(v):
    s = "" if v is None else str(v)
    if "\t" in s or "\n" in s:
        raise ValueError(f"report cell contains a tab or newline: {s!r}")
    return s


def write_report(path, columns, rows, fmt="tsv", provenance=None):
    columns = list(columns)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if fmt == "tsv":
            if provenance is not None:
                fh.write(provenance_line(provenance) + "\n")
            fh.write("\t".join(columns) + "\n")
            for row in rows:
                fh.write("\t".join(_cell(row.get(c)) for c in columns) + "\n")
        elif fmt == "jsonl":
            if provenance is not None:
                fh.write(json.dumps({"_provenance": provenance}, sort_keys=True) + "\n")
            for row in rows:
                fh.write(json.dumps({c: row.get(c) for c in columns}) + "\n")
        else:
            raise ValueError(f"unknown report format {fmt!r}")


def read_report(path, fmt="tsv"):
    """Returns ``(provenance, rows)``; TSV cells come back as strings."""
    prov, rows = {}, []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if fmt == "tsv":
        if lines and lines[0].startswith(PROVENANCE_PREFIX):
            prov = parse_provenance(lines[0])
            lines = lines[1:]
        if not lines:
            return prov, rows
        header = lines[0].split("\t")
        for line in lines[1:]:
            if line:
                rows.append(dict(zip(header, line.split("\t"))))
    elif fmt == "jsonl":
        for line in lines:
            if not line.strip():
                continue
            rec = json.loads(line)
            if "_provenance" in rec:
                prov = rec["_provenance"]
            else:
                rows.append({k: ("" if v is None else str(v)) for k, v in rec.items()})
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return prov, rows
