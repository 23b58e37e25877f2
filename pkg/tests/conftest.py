def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, collected from user properties."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) != "call":
                continue
            for name, value in rep.user_properties:
                if name == "criterion":
                    num, label, detail = value
                    verdict = "PASS" if rep.passed else "FAIL"
                    lines.append((num, f"[{verdict}] criterion {num:>2} {label}: {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
