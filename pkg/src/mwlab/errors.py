"""Exception and warning types shared across mwlab."""


class MwlabError(ValueError):
    """Base class for validation errors (CLI exit code 2)."""


class NotHermitian(MwlabError):
    pass


class NotPositiveDefinite(MwlabError):
    def __init__(self, msg, eigenvalue=None):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class GridMismatch(MwlabError):
    pass


class IncompleteSpectrum(MwlabError):
    pass


class CubeOutsideGrid(MwlabError):
    pass


class OutOfRange(MwlabError):
    pass


class EmptyList(MwlabError):
    pass


class DegenerateBody(MwlabError):
    pass


class SingularMatrixOnEllipsoid(MwlabError):
    pass


class EmptyOmega(MwlabError):
    pass


class EmptyFamily(MwlabError):
    pass


class InvalidModel(MwlabError):
    pass


class SupportTooLargeForExhaustive(MwlabError):
    pass


class CertificationError(RuntimeError):
    """Base class for certification failures (CLI exit code 3)."""


class SandwichCertificationFailed(CertificationError):
    def __init__(self, msg, slack=None):
        super().__init__(msg)
        self.slack = slack


class SignatureSetTooSmall(UserWarning):
    """Emitted when a Gamma-type paraproduct has an empty index set."""
