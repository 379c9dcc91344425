"""Regenerate src/errspan/data/qualification_key.json.

Offsets are computed from substring search so the fixture stays consistent
if the texts are edited.
"""

import json
import pathlib


def span(text, needle):
    start = text.index(needle)
    return {"start": start, "end": start + len(needle)}


def exercise(text, needle, error_type, instructions=""):
    key = dict(span(text, needle))
    key["error_type"] = error_type
    return {"text": text, "key": key, "instructions": instructions}


EXERCISES = [
    exercise(
        "The team have went to the stadium before the match started.",
        "have went",
        "Grammar_Usage",
        "Mark the span with a grammar or word-usage problem.",
    ),
    exercise(
        "The recipe explains how to bake bread. Meanwhile, the stock market closed higher on Tuesday.",
        "the stock market closed higher on Tuesday",
        "Off_Prompt",
        "Mark the span that ignores or contradicts the prompt about baking.",
    ),
    exercise(
        "The lake was frozen solid. The lake was frozen solid, and skaters crossed it.",
        "The lake was frozen solid,",
        "Redundant",
        "Mark the span that repeats earlier material.",
    ),
    exercise(
        "Maria said she has never owned a car. She parked her car in the garage.",
        "She parked her car in the garage",
        "Self_Contradiction",
        "Mark the span that contradicts an earlier statement.",
    ),
    exercise(
        "The committee approved the budget because purple elephants negotiate quarterly rainfall.",
        "purple elephants negotiate quarterly rainfall",
        "Incoherent",
        "Mark the span that does not make sense.",
    ),
    exercise(
        "Each of the four boxes holds 5 apples, so there are 30 apples in total.",
        "30 apples in total",
        "Bad_Math",
        "Mark the span with an arithmetic mistake.",
    ),
    exercise(
        "The Eiffel Tower, located in Berlin, attracts millions of visitors each year.",
        "located in Berlin",
        "Encyclopedic",
        "Mark the span with a factual error you know to be wrong.",
    ),
    exercise(
        "He poured the water into the basket and carried the water home without losing a drop.",
        "poured the water into the basket",
        "Commonsense",
        "Mark the span that violates everyday common sense.",
    ),
    exercise(
        "The startup claims its battery stores 400 watt-hours per kilogram, a figure no lab has confirmed.",
        "stores 400 watt-hours per kilogram",
        "Needs_Google",
        "Mark the span you would have to look up to verify.",
    ),
    exercise(
        "To fix the leak, recalibrate the flux manifold's azimuthal dampener array.",
        "flux manifold's azimuthal dampener array",
        "Technical_Jargon",
        "Mark the span an average reader would find too technical.",
    ),
]

MCQ_CHOICES = [
    "Grammar_Usage",
    "Off_Prompt",
    "Redundant",
    "Self_Contradiction",
    "Incoherent",
    "Bad_Math",
    "Encyclopedic",
    "Commonsense",
    "Needs_Google",
    "Technical_Jargon",
]


def mcq(text, needle, answer_type):
    return {
        "text": text,
        "span": span(text, needle),
        "choices": MCQ_CHOICES,
        "answer": MCQ_CHOICES.index(answer_type),
    }


MCQS = [
    mcq("She don't like the new schedule at all.", "don't like", "Grammar_Usage"),
    mcq(
        "Write about your favorite meal. The history of the Roman Senate is long and complicated.",
        "The history of the Roman Senate is long and complicated",
        "Off_Prompt",
    ),
    mcq(
        "The bridge is made of steel. The bridge is made of steel and opened in 1932.",
        "The bridge is made of steel and",
        "Redundant",
    ),
    mcq(
        "Tom is an only child. His sister visits him every summer.",
        "His sister visits him",
        "Self_Contradiction",
    ),
    mcq(
        "The meeting starts at noon, which is why the ocean prefers blue triangles.",
        "the ocean prefers blue triangles",
        "Incoherent",
    ),
    mcq(
        "Tickets cost 12 dollars each, so two tickets cost 20 dollars.",
        "two tickets cost 20 dollars",
        "Bad_Math",
    ),
    mcq(
        "Mount Everest, the tallest mountain in South America, was first climbed in 1953.",
        "the tallest mountain in South America",
        "Encyclopedic",
    ),
    mcq(
        "She dried the towels by soaking them in the bathtub overnight.",
        "dried the towels by soaking them in the bathtub",
        "Commonsense",
    ),
    mcq(
        "The report says the factory recycles 97 percent of its waste water.",
        "recycles 97 percent of its waste water",
        "Needs_Google",
    ),
    mcq(
        "Adjust the eigenvalue decomposition threshold in the preconditioner before solving.",
        "eigenvalue decomposition threshold in the preconditioner",
        "Technical_Jargon",
    ),
]

REAL_TASK_TEXT = (
    "The city council unveiled it's plan for the new riverside park on Monday. "
    "The park will include a playground, a boathouse, and a playground for children. "
    "Council member Ortiz, who has never attended a council meeting, said she voted for the plan twice. "
    "The park covers 40 acres split into five equal sections of 10 acres each. "
    "Officials said the fountain would be carved from a single block of sound. "
    "Residents can review the proposal, which cites the 1987 Riverside Flood Control Act, online. "
    "The design uses bioswale infiltration galleries to manage stormwater runoff."
)

REAL_TASK_KEYS = [
    ("it's plan", "Grammar_Usage"),
    ("and a playground for children", "Redundant"),
    ("who has never attended a council meeting", "Self_Contradiction"),
    ("said she voted for the plan twice", "Incoherent"),
    ("five equal sections of 10 acres each", "Bad_Math"),
    ("carved from a single block of sound", "Commonsense"),
    ("cites the 1987 Riverside Flood Control Act", "Needs_Google"),
]


def main():
    keys = []
    for needle, error_type in REAL_TASK_KEYS:
        k = dict(span(REAL_TASK_TEXT, needle))
        k["error_type"] = error_type
        keys.append(k)
    obj = {
        "exercises": EXERCISES,
        "mcqs": MCQS,
        "real_task": {"text": REAL_TASK_TEXT, "keys": keys},
    }
    out = pathlib.Path(__file__).resolve().parents[1] / "src/errspan/data/qualification_key.json"
    out.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
