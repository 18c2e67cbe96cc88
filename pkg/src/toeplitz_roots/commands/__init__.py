"""
CLI commands.

Every module here defines ``Command`` subclasses; they are registered under
kebab-case names (``LemmaACommand`` -> ``lemma-a``) when the registry is
first used.
"""
