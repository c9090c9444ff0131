import os
import sys

sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get('test_acceptance')
    lines = getattr(mod, 'LINES', None)
    if lines:
        terminalreporter.section('acceptance criteria')
        for line in sorted(lines, key=lambda x: (x.startswith('INFO'), x[6:9])):
            terminalreporter.write_line(line)
