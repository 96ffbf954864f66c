"""The category/affordance table driving question generation and mention lookup.

Shipped as an editable JSON data file; ``load_affordances()`` with no argument
returns the packaged default.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class LogicalSetup:
    """An (anchor category, activity phrase, needed tag) composition."""

    anchor: str
    activity: str
    tag: str


@dataclass(frozen=True)
class AffordanceTable:
    categories: dict  # category -> tuple of tags
    synonyms: dict  # category -> tuple of extra phrases
    mention_anchors: dict  # room word -> tuple of anchor categories
    tag_questions: dict  # tag -> tuple of question strings
    tag_actions: dict  # tag -> action phrase
    logical_setups: tuple
    emotional_questions: tuple
    placement_question: str
    hazard_question: str
    reach_height: float
    _phrase_map: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        phrase_map: dict[str, tuple[str, ...]] = {}
        for cat in self.categories:
            phrase_map[cat.replace("_", " ")] = (cat,)
            for syn in self.synonyms.get(cat, ()):
                phrase_map[syn.lower()] = (cat,)
        for word, cats in self.mention_anchors.items():
            phrase_map[word.lower()] = tuple(cats)
        object.__setattr__(self, "_phrase_map", phrase_map)

    def tags_of(self, category: str) -> tuple[str, ...]:
        return self.categories.get(category, ())

    def categories_with_tag(self, tag: str) -> list[str]:
        return sorted(c for c, tags in self.categories.items() if tag in tags)

    def phrase_for(self, category: str) -> str:
        return category.replace("_", " ")

    def categories_for_phrase(self, phrase: str) -> tuple[str, ...]:
        return self._phrase_map.get(phrase.lower(), ())

    def phrases(self) -> list[str]:
        return list(self._phrase_map)

    def action_for_tag(self, tag: str) -> str:
        return self.tag_actions[tag]

    def tag_for_action(self, action: str) -> Optional[str]:
        for tag, phrase in self.tag_actions.items():
            if phrase == action:
                return tag
        return None

    def validate(self) -> list[str]:
        """Internal consistency problems, empty when the table is usable."""
        problems = []
        for tag in self.tag_questions:
            if not self.categories_with_tag(tag):
                problems.append(f"tag {tag!r} has questions but no categories")
        for setup in self.logical_setups:
            if setup.anchor not in self.categories:
                problems.append(f"logical anchor {setup.anchor!r} is not a category")
            if setup.tag not in self.tag_actions:
                problems.append(f"logical tag {setup.tag!r} has no action phrase")
        for tag, questions in self.tag_questions.items():
            for q in questions:
                if _placeholders(q):
                    problems.append(f"functional question for {tag!r} has placeholders: {q!r}")
        for word, cats in self.mention_anchors.items():
            for c in cats:
                if c not in self.categories:
                    problems.append(f"mention anchor {word!r} references unknown category {c!r}")
        return problems


def _placeholders(template: str) -> list[str]:
    return [f for _, f, _, _ in string.Formatter().parse(template) if f is not None]


def load_affordances(path: Optional[Path] = None) -> AffordanceTable:
    if path is None:
        raw = resources.files("ground3d.annotation").joinpath("data/affordances.json").read_text()
        data = json.loads(raw)
    else:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    table = AffordanceTable(
        categories={c: tuple(tags) for c, tags in data["categories"].items()},
        synonyms={c: tuple(s) for c, s in data.get("synonyms", {}).items()},
        mention_anchors={w: tuple(c) for w, c in data.get("mention_anchors", {}).items()},
        tag_questions={t: tuple(q) for t, q in data["tag_questions"].items()},
        tag_actions=dict(data["tag_actions"]),
        logical_setups=tuple(LogicalSetup(**s) for s in data.get("logical_setups", [])),
        emotional_questions=tuple(data.get("emotional_questions", [])),
        placement_question=data["safety"]["placement_question"],
        hazard_question=data["safety"]["hazard_question"],
        reach_height=float(data["safety"].get("reach_height", 1.2)),
    )
    problems = table.validate()
    if problems:
        raise ValueError("affordance table is inconsistent: " + "; ".join(problems))
    return table
