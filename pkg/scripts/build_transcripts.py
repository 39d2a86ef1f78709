#!/usr/bin/env python3
"""Regenerate the bundled golden transcripts and verify each run end to end."""

from __future__ import annotations

import json
from pathlib import Path

from ontoslice.generate import toy_ontology
from ontoslice.llm import LlmProvider, load_transcript
from ontoslice.pipeline import Done, run_pipeline

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "ontoslice" / "data" / "transcripts"


def grounded(concepts: list[str], relationships: list[str]) -> str:
    payload = {"concepts": concepts, "relationships": relationships}
    return "```json\n" + json.dumps(payload, indent=2) + "\n```"


def missing(concepts: list[str], links: list[tuple[str, str]]) -> str:
    payload = {
        "missing_concepts": concepts,
        "missing_links": [{"from": a, "to": b} for a, b in links],
    }
    return "```json\n" + json.dumps(payload, indent=2) + "\n```"


def sparql(query: str) -> str:
    return "```sparql\n" + query.strip() + "\n```"


BUNDLES = {
    "plans_per_customer": {
        "question": "Which plans does each customer have?",
        "entries": [
            {"phase": "approximation", "match": "any",
             "response": grounded(["Customer", "Plan"], ["has plan"])},
            {"phase": "refinement", "match": "any", "response": missing([], [])},
            {"phase": "translation", "match": "any", "response": sparql("""
PREFIX tel: <http://example.org/telecom#>
SELECT ?customerName ?planName WHERE {
  ?customer a tel:Customer ;
      tel:customerName ?customerName ;
      tel:hasPlan ?plan .
  ?plan tel:planName ?planName .
}
""")},
        ],
        "expected_calls": 3,
    },
    "invoice_total_per_region": {
        "question": "What is the total invoice amount per region?",
        "entries": [
            {"phase": "approximation", "match": "any",
             "response": grounded(["Invoice", "Region"], [])},
            {"phase": "refinement", "match": "any",
             "response": missing([], [("invoice", "region")])},
            {"phase": "refinement", "match": "any", "response": missing([], [])},
            {"phase": "translation", "match": "any", "response": sparql("""
PREFIX tel: <http://example.org/telecom#>
SELECT ?regionName (SUM(?amount) AS ?total) WHERE {
  ?plan a tel:Plan ;
      tel:billedBy ?invoice ;
      tel:coversRegion ?region .
  ?invoice tel:invoiceAmount ?amount .
  ?region tel:regionName ?regionName .
}
GROUP BY ?regionName
""")},
        ],
        "expected_calls": 4,
    },
    "union_customers": {
        "question": "Which customers reported a ticket or made a payment?",
        "entries": [
            {"phase": "approximation", "match": "any",
             "response": grounded(["Customer", "Ticket", "Payment"], ["reported by", "made by"])},
            {"phase": "refinement", "match": "any", "response": missing([], [])},
            {"phase": "translation", "match": "any", "response": sparql("""
PREFIX tel: <http://example.org/telecom#>
SELECT DISTINCT ?name WHERE {
  { ?ticket a tel:Ticket ; tel:reportedBy ?customer . }
  UNION
  { ?payment a tel:Payment ; tel:madeBy ?customer . }
  ?customer tel:customerName ?name .
}
""")},
        ],
        "expected_calls": 3,
    },
    "tickets_per_employee": {
        "question": "How many tickets are assigned to each employee?",
        "entries": [
            {"phase": "approximation", "match": "any",
             "response": grounded(["Ticket", "Employee"], ["assigned to"])},
            {"phase": "refinement", "match": "any", "response": missing([], [])},
            {"phase": "translation", "match": "any", "response": sparql("""
PREFIX tel: <http://example.org/telecom#>
SELECT ?employeeName (COUNT(?ticket) AS ?ticketCount) WHERE {
  ?ticket a tel:Ticket ;
      tel:assignedTo ?employee .
  ?employee tel:employeeName ?employeeName .
}
GROUP BY ?employeeName
ORDER BY DESC(?ticketCount)
""")},
        ],
        "expected_calls": 3,
    },
    "devices_in_north_region": {
        "question": "Which devices are sold at stores in the North region?",
        "entries": [
            {"phase": "approximation", "match": "any",
             "response": grounded(["Device", "Store", "Region"], ["sold at", "located in"])},
            # Early emission: the slice already suffices, so refinement answers
            # with the query itself.
            {"phase": "refinement", "match": "any", "response": sparql("""
PREFIX tel: <http://example.org/telecom#>
SELECT ?deviceModel WHERE {
  ?device a tel:Device ;
      tel:deviceModel ?deviceModel ;
      tel:soldAt ?store .
  ?store tel:locatedIn ?region .
  ?region tel:regionName ?name .
  FILTER(?name = "North")
}
""")},
        ],
        "expected_calls": 2,
    },
}


def main() -> None:
    ontology = toy_ontology()
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, bundle in BUNDLES.items():
        document = {"question": bundle["question"], "entries": bundle["entries"]}
        text = json.dumps(document, indent=2) + "\n"
        provider = LlmProvider(kind="scripted", transcript=load_transcript(text))
        log = run_pipeline(bundle["question"], ontology, provider)
        status = type(log.outcome).__name__
        calls = len(log.exchanges)
        ok = isinstance(log.outcome, Done) and calls == bundle["expected_calls"]
        print(f"{name}: {status} after {calls} calls "
              f"({'OK' if ok else 'MISMATCH vs ' + str(bundle['expected_calls'])})")
        if not isinstance(log.outcome, Done):
            print("   outcome:", log.outcome)
            for e in log.exchanges:
                print("   ", e.phase, type(e.parsed).__name__, getattr(e.parsed, "reason", ""))
        if ok:
            (OUT_DIR / f"{name}.json").write_text(text, encoding="utf-8")
    print("slices of last run:", [len(s) for s in log.slices])


if __name__ == "__main__":
    main()
