# Anchors the pytest rootdir and puts the repo root on sys.path so the
# plots package (which is not installed) imports in plots/tests.
