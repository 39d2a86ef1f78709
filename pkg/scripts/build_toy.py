#!/usr/bin/env python3
"""Regenerate the bundled toy telecom ontology data file."""

from __future__ import annotations

from pathlib import Path

from ontoslice.model import (
    OWL_NS,
    RDF_NS,
    RDFS_NS,
    XSD_NS,
    Attribute,
    Concept,
    Ontology,
    Relationship,
)
from ontoslice.turtleio import parse_turtle, serialize_turtle

TEL = "http://example.org/telecom#"


def concept(name: str, comment: str) -> Concept:
    return Concept(TEL + name, label=name, comment=comment)


def rel(name: str, label: str, domain: str, range_: str, comment: str) -> Relationship:
    return Relationship(
        TEL + name,
        label=label,
        comment=comment,
        domains=frozenset([TEL + domain]),
        ranges=frozenset([TEL + range_]),
    )


def attr(name: str, label: str, domain: str, datatype: str, comment: str) -> Attribute:
    return Attribute(
        TEL + name,
        datatype=XSD_NS + datatype,
        label=label,
        comment=comment,
        domains=frozenset([TEL + domain]),
    )


CONCEPTS = [
    concept("Customer", "A person or business subscribed to the provider."),
    concept("Account", "A billing account held by a customer."),
    concept("Plan", "A subscription plan with pricing and coverage."),
    concept("Invoice", "A monthly statement of charges."),
    concept("Payment", "A settlement made against an invoice."),
    concept("Device", "A handset or modem registered on the network."),
    concept("Line", "A phone line attached to an account."),
    concept("Region", "A geographic service region."),
    concept("Store", "A retail store selling devices and plans."),
    concept("Employee", "A staff member of the provider."),
    concept("Ticket", "A customer support ticket."),
]

RELATIONSHIPS = [
    rel("hasAccount", "has account", "Customer", "Account", "Account ownership."),
    rel("hasPlan", "has plan", "Customer", "Plan", "Subscription of a customer to a plan."),
    rel("billedBy", "billed by", "Plan", "Invoice", "Invoices that bill a plan."),
    rel("paidBy", "paid by", "Invoice", "Payment", "Payments settling an invoice."),
    rel("issuedTo", "issued to", "Invoice", "Account", "The account an invoice is issued to."),
    rel("hasLine", "has line", "Account", "Line", "Lines attached to an account."),
    rel("usesDevice", "uses device", "Line", "Device", "The device a line runs on."),
    rel("soldAt", "sold at", "Device", "Store", "The store a device was sold at."),
    rel("locatedIn", "located in", "Store", "Region", "The region a store sits in."),
    rel("servesRegion", "serves region", "Employee", "Region", "Regions an employee covers."),
    rel("worksAt", "works at", "Employee", "Store", "The store an employee works at."),
    rel("reportedBy", "reported by", "Ticket", "Customer", "The customer who opened a ticket."),
    rel("assignedTo", "assigned to", "Ticket", "Employee", "The employee handling a ticket."),
    rel("concernsLine", "concerns line", "Ticket", "Line", "The line a ticket is about."),
    rel("coversRegion", "covers region", "Plan", "Region", "Regions a plan covers."),
    rel("madeBy", "made by", "Payment", "Customer", "The customer who made a payment."),
]

ATTRIBUTES = [
    attr("customerName", "customer name", "Customer", "string", "Full name of the customer."),
    attr("accountNumber", "account number", "Account", "string", "External account number."),
    attr("monthlyFee", "monthly fee", "Plan", "decimal", "Monthly fee of the plan."),
    attr("planName", "plan name", "Plan", "string", "Marketing name of the plan."),
    attr("invoiceAmount", "invoice amount", "Invoice", "decimal", "Total amount due."),
    attr("invoiceDate", "invoice date", "Invoice", "date", "Date the invoice was issued."),
    attr("paymentAmount", "payment amount", "Payment", "decimal", "Amount paid."),
    attr("deviceModel", "device model", "Device", "string", "Manufacturer model name."),
    attr("phoneNumber", "phone number", "Line", "string", "The line's phone number."),
    attr("regionName", "region name", "Region", "string", "Human-readable region name."),
    attr("employeeName", "employee name", "Employee", "string", "Full name of the employee."),
    attr("ticketStatus", "ticket status", "Ticket", "string", "Workflow status of the ticket."),
]


def build() -> Ontology:
    return Ontology(
        {c.iri: c for c in CONCEPTS},
        {r.iri: r for r in RELATIONSHIPS},
        {a.iri: a for a in ATTRIBUTES},
        {"owl": OWL_NS, "rdf": RDF_NS, "rdfs": RDFS_NS, "tel": TEL, "xsd": XSD_NS},
    )


def main() -> None:
    ontology = build()
    text = serialize_turtle(ontology)
    result = parse_turtle(text)
    assert result.ontology == ontology, result.diagnostics
    out = Path(__file__).resolve().parents[1] / "src" / "ontoslice" / "data" / "toy_telecom.ttl"
    out.write_text(text, encoding="utf-8")
    print(f"wrote {out} ({len(ontology.concepts)} concepts, {len(ontology.relationships)} relationships)")


if __name__ == "__main__":
    main()
