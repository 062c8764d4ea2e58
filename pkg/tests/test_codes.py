import pytest

from readmit.codes import (
    COMORBIDITY_NAMES, DISCHARGE_CPT_RANGES, ED_CPT_RANGES,
    HOSPITAL_VISIT_CPT_RANGES, INPATIENT_CPT_RANGES, icd9_chapter,
    load_code_mappings,
)
from readmit.errors import MappingError


def ranges_as_set(ranges):
    return {c for low, high in ranges for c in range(low, high + 1)}


def test_default_inpatient_set_matches_declared_ranges(mappings):
    expected = set(range(99231, 99237)) | set(range(99224, 99227)) \
        | set(range(99281, 99286)) | set(range(99291, 99293))
    assert ranges_as_set(mappings.inpatient_cpt) == expected
    assert mappings.is_inpatient("99281")
    assert mappings.is_inpatient("99236")
    assert not mappings.is_inpatient("99211")


def test_default_hospital_visit_set(mappings):
    expected = set(range(99218, 99224)) | set(range(99251, 99255))
    assert ranges_as_set(mappings.hospital_visit_cpt) == expected
    assert mappings.is_hospital_visit("99220")


def test_default_ed_and_discharge_sets(mappings):
    assert ranges_as_set(mappings.ed_cpt) == set(range(99281, 99286))
    assert ranges_as_set(mappings.discharge_cpt) == {99217, 99238, 99239}


def test_default_constants_match_config(mappings):
    assert mappings.inpatient_cpt == INPATIENT_CPT_RANGES
    assert mappings.ed_cpt == ED_CPT_RANGES
    assert mappings.hospital_visit_cpt == HOSPITAL_VISIT_CPT_RANGES
    assert mappings.discharge_cpt == DISCHARGE_CPT_RANGES


def test_comorbidity_names_count():
    assert len(COMORBIDITY_NAMES) == 30
    assert COMORBIDITY_NAMES[0] == "CHF" and COMORBIDITY_NAMES[-1] == "Depression"


def test_standard_map_worked_example_codes(mappings):
    assert mappings.comorbidities_for("40201") == ("CHF",)
    assert mappings.comorbidities_for("402.01") == ("CHF",)
    assert mappings.comorbidities_for("09320") == ("Valvular",)
    assert mappings.comorbidities_for("34200") == ("Paralysis",)
    assert mappings.comorbidities_for("49001") == ("Pulmonary",)


def test_longest_prefix_wins(mappings):
    # 402 alone is complicated hypertension; the 5-digit heart-failure
    # codes must shadow it.
    assert mappings.comorbidities_for("40200") == ("HTNcx",)
    assert mappings.comorbidities_for("40201") == ("CHF",)
    # 3341 is paralysis even though 334 is other-neuro.
    assert mappings.comorbidities_for("33410") == ("Paralysis",)
    assert mappings.comorbidities_for("33400") == ("NeuroOther",)


def test_equal_length_ties_return_both(mappings):
    assert set(mappings.comorbidities_for("40403")) == {"CHF", "Renal"}
    assert set(mappings.comorbidities_for("4255")) == {"CHF", "Alcohol"}


def test_unmapped_code_has_no_comorbidity(mappings):
    assert mappings.comorbidities_for("78650") == ()
    assert mappings.comorbidities_for("ZZZ") == ()


def test_custom_comorbidity_file(tmp_path):
    path = tmp_path / "map.csv"
    path.write_text("icd9_prefix,comorbidity\n4020,CHF\n")
    config = load_code_mappings(comorbidity_path=path)
    assert config.comorbidities_for("40201") == ("CHF",)
    assert config.comorbidities_for("40210") == ()


def test_unknown_comorbidity_name_rejected(tmp_path):
    path = tmp_path / "map.csv"
    path.write_text("icd9_prefix,comorbidity\n428,HeartFailure\n")
    with pytest.raises(MappingError):
        load_code_mappings(comorbidity_path=path)


def test_empty_map_file_rejected(tmp_path):
    path = tmp_path / "map.csv"
    path.write_text("icd9_prefix,comorbidity\n")
    with pytest.raises(MappingError):
        load_code_mappings(comorbidity_path=path)


def test_overlapping_ccs_ranges_rejected(tmp_path):
    path = tmp_path / "ccs.csv"
    path.write_text(
        "cpt_low,cpt_high,ccs_id,ccs_label\n"
        "61000,61055,1,Incision and excision of CNS\n"
        "61050,61100,2,Other\n"
    )
    with pytest.raises(MappingError):
        load_code_mappings(ccs_path=path)


def test_ccs_lookup(mappings):
    assert mappings.ccs_labels[mappings.ccs_category("61000")] == "Incision and excision of CNS"
    assert mappings.ccs_labels[mappings.ccs_category("43888")] == "Gastric bypass and volume reduction"
    assert mappings.ccs_category("99231") is None
    assert mappings.ccs_category("0001U") is None


@pytest.mark.parametrize("code,chapter", [
    ("37234", "Nervous system and sense organs"),
    ("04112", "Infectious and parasitic disease"),
    ("18619", "Neoplasms"),
    ("99529", "Injury and poisoning"),
    ("68250", "Skin and subcutaneous tissue"),
    ("78903", "Symptoms, signs and ill-defined conditions"),
    ("V4501", "Factors influencing health status and contact with health services"),
    ("E8120", "Others"),
    ("ZZZ", "Others"),
    ("99", "Others"),
])
def test_icd9_chapters(code, chapter):
    assert icd9_chapter(code) == chapter
