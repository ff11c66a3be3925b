criterion_lines = []


def record_criterion(number, ok, detail):
    line = "criterion %2d: %s  %s" % (number, "PASS" if ok else "FAIL", detail)
    criterion_lines.append((number, line))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not criterion_lines:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance summary")
    terminalreporter.write_line("------------------")
    for _, line in sorted(criterion_lines):
        terminalreporter.write_line(line)
