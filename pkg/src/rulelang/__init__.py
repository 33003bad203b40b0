"""An interpreter for an imperative object language with embedded Datalog rule sets."""

__version__ = "0.1.0"
