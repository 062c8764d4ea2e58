"""Episode grouping, admission identification, and 30-day readmission labels.

Claims of one user are grouped into an episode while each next claim starts
strictly less than ``gap_days`` after the episode's running latest service
end. Episodes containing at least one inpatient E&M claim are admissions.
A later admission starting within ``window_days`` of the last retained
admission's discharge is removed as a readmission and flips that retained
admission's label to true; comparisons are always against the last retained
admission, never against a removed one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

from .claims import MedicalClaim
from .codes import CodeMappingConfig
from .errors import ReadmitError

ADMISSIONS_COLUMNS = [
    "user_id", "admission_id", "start", "end", "is_ed",
    "readmitted_within_30d", "removed_readmission_count",
]


@dataclass(frozen=True)
class Episode:
    user_id: str
    episode_id: str                       # "E1", "E2", ... per user, chronological
    start: date
    end: date
    member_claims: tuple[MedicalClaim, ...]

    @property
    def member_claim_ids(self) -> tuple[str, ...]:
        return tuple(c.claim_id for c in self.member_claims)


@dataclass(frozen=True)
class LabeledAdmission:
    user_id: str
    admission_id: str                     # "A1", "A2", ... global, (user_id, start) order
    episode_id: str
    start: date
    end: date
    member_claims: tuple[MedicalClaim, ...]
    is_ed_admission: bool
    readmitted_within_30d: bool
    removed_readmission_ids: tuple[str, ...]

    @property
    def member_claim_ids(self) -> tuple[str, ...]:
        return tuple(c.claim_id for c in self.member_claims)


def group_claims_into_episodes(claims: list[MedicalClaim], gap_days: int = 10) -> list[Episode]:
    """Group one user's claims into episodes under the gap rule.

    Claims are sorted by (service_start, service_end, claim_id); a claim
    joins the open episode iff its start is strictly less than ``gap_days``
    after the episode's running max service end, so overlapping and
    same-day claims always join.
    """
    if gap_days < 0:
        raise ValueError("gap_days must be non-negative")
    if not claims:
        return []
    users = {c.user_id for c in claims}
    if len(users) > 1:
        raise ValueError(f"claims span multiple users: {sorted(users)}")
    ordered = sorted(claims, key=lambda c: (c.service_start, c.service_end, c.claim_id))
    episodes: list[Episode] = []
    group: list[MedicalClaim] = [ordered[0]]
    running_end = ordered[0].service_end

    def close(group):
        episodes.append(Episode(
            user_id=group[0].user_id,
            episode_id=f"E{len(episodes) + 1}",
            start=min(c.service_start for c in group),
            end=max(c.service_end for c in group),
            member_claims=tuple(group),
        ))

    for claim in ordered[1:]:
        if (claim.service_start - running_end).days < gap_days:
            group.append(claim)
            running_end = max(running_end, claim.service_end)
        else:
            close(group)
            group = [claim]
            running_end = claim.service_end
    close(group)
    return episodes


def filter_admissions(episodes: list[Episode], config: CodeMappingConfig) -> list[Episode]:
    """Keep episodes with at least one inpatient E&M claim.

    Discharge CPT codes are billed too rarely to anchor detection and are
    deliberately not consulted.
    """
    return [e for e in episodes if any(config.is_inpatient(c.cpt_code) for c in e.member_claims)]


def label_readmissions(
    admissions: list[Episode],
    config: CodeMappingConfig,
    window_days: int = 30,
) -> tuple[list[LabeledAdmission], list[Episode]]:
    """Sweep one user's admissions chronologically, splitting them into
    retained index admissions (labeled) and removed readmissions.

    Returns (labeled admissions, removed episodes). ``admission_id`` is left
    empty here; :func:`build_labeled_admissions` assigns global ids.
    """
    ordered = sorted(admissions, key=lambda e: (e.start, e.end, e.episode_id))
    retained: list[Episode] = []
    removed: list[Episode] = []
    removed_against: dict[str, list[str]] = {}
    for adm in ordered:
        if retained and (adm.start - retained[-1].end).days <= window_days:
            removed.append(adm)
            removed_against.setdefault(retained[-1].episode_id, []).append(adm.episode_id)
        else:
            retained.append(adm)
    labeled = [
        LabeledAdmission(
            user_id=e.user_id,
            admission_id="",
            episode_id=e.episode_id,
            start=e.start,
            end=e.end,
            member_claims=e.member_claims,
            is_ed_admission=any(config.is_ed(c.cpt_code) for c in e.member_claims),
            readmitted_within_30d=e.episode_id in removed_against,
            removed_readmission_ids=tuple(removed_against.get(e.episode_id, ())),
        )
        for e in retained
    ]
    return labeled, removed


def build_labeled_admissions(
    claims: list[MedicalClaim],
    config: CodeMappingConfig,
    gap_days: int = 10,
    window_days: int = 30,
) -> tuple[list[LabeledAdmission], list[Episode]]:
    """Full chain over all users: group, filter, label, and assign global
    admission ids in (user_id, start) order."""
    by_user: dict[str, list[MedicalClaim]] = {}
    for claim in claims:
        by_user.setdefault(claim.user_id, []).append(claim)
    labeled: list[LabeledAdmission] = []
    removed: list[Episode] = []
    for user_id in sorted(by_user):
        episodes = group_claims_into_episodes(by_user[user_id], gap_days)
        admissions = filter_admissions(episodes, config)
        user_labeled, user_removed = label_readmissions(admissions, config, window_days)
        labeled.extend(user_labeled)
        removed.extend(user_removed)
    labeled.sort(key=lambda a: (a.user_id, a.start, a.end))
    labeled = [replace(a, admission_id=f"A{i + 1}") for i, a in enumerate(labeled)]
    return labeled, removed


def readmission_rate_from_counts(n_readmissions: int, n_total: int) -> float:
    if n_total <= 0:
        raise ReadmitError("readmission rate undefined: no admissions")
    return n_readmissions / n_total


def readmission_rate(labeled: list[LabeledAdmission]) -> float:
    """Fraction of all admissions (retained + removed) that were removed
    as readmissions."""
    n_removed = sum(len(a.removed_readmission_ids) for a in labeled)
    return readmission_rate_from_counts(n_removed, len(labeled) + n_removed)


def write_admissions_csv(labeled: list[LabeledAdmission], dest):
    fh, close = (open(dest, "w", newline="", encoding="utf-8"), True) \
        if isinstance(dest, (str, Path)) else (dest, False)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ADMISSIONS_COLUMNS)
        for a in labeled:
            writer.writerow([
                a.user_id, a.admission_id, a.start.isoformat(), a.end.isoformat(),
                str(a.is_ed_admission).lower(), str(a.readmitted_within_30d).lower(),
                str(len(a.removed_readmission_ids)),
            ])
    finally:
        if close:
            fh.close()
