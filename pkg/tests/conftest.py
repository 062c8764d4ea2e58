import io

import pytest
from hypothesis import HealthCheck, settings

from readmit.claims import (
    parse_demographics, parse_medical_claims, parse_pharmacy_claims,
)
from readmit.codes import load_code_mappings

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# The seven medical claims, three pharmacy claims, and two demographics rows
# of the worked example that the whole pipeline must reproduce.
WORKED_MEDICAL = """user_id,claim_id,service_start,service_end,primary_diagnosis,other_diagnoses,cpt_code
User1,C1,2017-04-01,2017-04-01,682.50,786.50,99211
User1,C2,2017-05-01,2017-05-03,70890,40201,99281
User1,C3,2017-05-04,2017-05-08,041.12,09320,61000
User1,C4,2017-05-21,2017-06-09,186.19,00000,99231
User1,C5,2017-07-01,2017-07-03,37234,34200,99231
User2,C6,2018-01-03,2018-01-08,78903,49001,99231
User2,C7,2018-01-03,2018-01-15,995.29,00000,43888
"""

WORKED_PHARMACY = """user_id,claim_id,service_date,ndc_code
User1,P1,2017-05-05,0002759701
User1,P2,2017-05-07,5024204062
User2,P3,2018-01-04,6057541121
"""

WORKED_DEMOGRAPHICS = """user_id,gender,age,ethnicity,scheme_type
User1,M,25,Asian,Large Central Metro
User2,F,35,White,Medium Metro
"""


@pytest.fixture(scope="session")
def mappings():
    return load_code_mappings()


@pytest.fixture()
def worked_example():
    return {
        "medical": parse_medical_claims(io.StringIO(WORKED_MEDICAL)).records,
        "pharmacy": parse_pharmacy_claims(io.StringIO(WORKED_PHARMACY)).records,
        "demographics": parse_demographics(io.StringIO(WORKED_DEMOGRAPHICS)).records,
    }


@pytest.fixture()
def worked_example_files(tmp_path):
    med = tmp_path / "medical_claims.csv"
    med.write_text(WORKED_MEDICAL)
    pharm = tmp_path / "pharmacy_claims.csv"
    pharm.write_text(WORKED_PHARMACY)
    demo = tmp_path / "demographics.csv"
    demo.write_text(WORKED_DEMOGRAPHICS)
    return {"medical": med, "pharmacy": pharm, "demographics": demo}
