"""Exception hierarchy shared across the package."""


class PilotError(Exception):
    """Base class for every error raised by pilotcheck."""


class ModelError(PilotError):
    """A model document (or a piece of it) is malformed.

    ``section`` names the top-level section holding the fault and ``line``
    is the 1-based line in the source text when it could be located.
    """

    def __init__(self, message, section=None, line=None):
        self.section = section
        self.line = line
        where = []
        if section is not None:
            where.append(f"section '{section}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.message = message


class ParseError(ModelError):
    pass


class CycleError(ModelError):
    pass


class DanglingReference(ModelError):
    pass


class UnknownElement(PilotError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownPurpose(UnknownElement):
    pass


class UnknownEntity(UnknownElement):
    pass


class OntologyMismatch(PilotError):
    pass


class UnknownSymbol(PilotError):
    pass


class ArityMismatch(PilotError):
    pass


class TransferNotInPolicy(PilotError):
    pass


class AmbiguousHandshake(PilotError):
    pass


class ConfigError(ModelError):
    pass


class MappingPartial(PilotError):
    pass


class BoundExceeded(PilotError):
    """The exploration hit its state limit.

    The partial reachability summary is attached as ``summary``.
    """

    def __init__(self, summary):
        self.summary = summary
        super().__init__(
            f"state bound {summary.bound} exceeded after {summary.states} states "
            f"and {summary.transitions} transitions"
        )
