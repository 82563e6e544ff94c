# the presence of this file puts the repository root on sys.path, so the tests
# import the working copy of affdim rather than an installed one.
