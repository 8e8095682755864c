import pytest

from biasaudit.data import Dataset, ResponseRecord, SampleClass


@pytest.fixture
def make_dataset():
    """Factory: build a Dataset from (group, class, response) triples."""

    def build(rows):
        records = []
        for i, (group, cls, resp) in enumerate(rows):
            records.append(
                ResponseRecord(
                    sample_id=f"s{i:05d}",
                    group=group,
                    sample_class=SampleClass(cls),
                    response=float(resp),
                )
            )
        return Dataset(records)

    return build


@pytest.fixture
def write_csv(tmp_path):
    """Factory: write CSV text to a temp file and return its path."""

    counter = {"n": 0}

    def write(text, name=None):
        counter["n"] += 1
        path = tmp_path / (name or f"data{counter['n']}.csv")
        path.write_text(text, encoding="utf-8")
        return path

    return write
