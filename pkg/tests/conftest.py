from rttqe.rtt import Translator
from rttqe.validation import TranslationError


class CountingTranslator(Translator):
    """Wraps another translator and records every batch it is asked for."""

    def __init__(self, base):
        self.base = base
        self.system_id = base.system_id
        self.batches = []

    @property
    def calls(self):
        return len(self.batches)

    @property
    def texts_forwarded(self):
        return sum(len(b) for b in self.batches)

    def translate(self, texts, src, tgt):
        self.batches.append(list(texts))
        return self.base.translate(texts, src, tgt)


class FailingTranslator(Translator):
    system_id = "failing"

    def __init__(self, fail_on_call):
        self.fail_on_call = fail_on_call
        self.n = 0

    def translate(self, texts, src, tgt):
        self.n += 1
        if self.n == self.fail_on_call:
            raise TranslationError("boom")
        return [t.upper() for t in texts]


# one PASS/FAIL line per acceptance criterion at the end of the run
_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when != "call" and not report.failed:
        return
    name = report.nodeid.split("::")[-1]
    if report.failed or _acceptance.get(name) == "FAIL":
        _acceptance[name] = "FAIL"
    else:
        _acceptance[name] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[name]:4}  {name}")
