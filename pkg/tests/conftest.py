from hypothesis import settings

# property tests must not introduce run-to-run variation in CI
settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")
