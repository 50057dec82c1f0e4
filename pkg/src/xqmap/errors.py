"""Exception taxonomy shared across the package."""


class XQMapError(Exception):
    """Base class for all package-specific errors."""

    code = "error"


class ConfigError(XQMapError, ValueError):
    code = "config"


class PlacementError(XQMapError, RuntimeError):
    """Scene generation could not place the requested objects."""

    code = "placement"


class ContractViolationError(XQMapError, ValueError):
    """An input violated a documented precondition (e.g. non-unit normal)."""

    code = "contract"


class BoundsError(XQMapError, IndexError):
    """Pixel coordinates outside the grid."""

    code = "bounds"


class EpisodeFinishedError(XQMapError, RuntimeError):
    """A step was attempted on a finished episode."""

    code = "episode_finished"


class SelectionError(XQMapError, ValueError):
    """Action selection over an empty pixel mask."""

    code = "selection"


class MissingPairError(XQMapError, KeyError):
    """A requested explanation pair names an unknown candidate."""

    code = "missing_pair"


class TrainingDivergedError(XQMapError, RuntimeError):
    """Training aborted on a non-finite loss."""

    code = "diverged"


class SceneFormatError(XQMapError, ValueError):
    """A scene document failed validation."""

    code = "scene_format"


class CheckpointFormatError(XQMapError, ValueError):
    code = "checkpoint_format"


class CheckpointVersionError(CheckpointFormatError):
    code = "checkpoint_version"


class ChatError(XQMapError):
    """Base class for chat client failures."""

    code = "chat"


class ChatCredentialError(ChatError):
    """Credential environment variable missing or empty."""

    code = "chat_credential"


class ChatNetworkError(ChatError):
    code = "chat_network"


class ChatHTTPError(ChatError):
    """Endpoint answered with a non-success status."""

    code = "chat_http"

    def __init__(self, status: int, body: str = ""):
        super().__init__(f"chat endpoint returned status {status}")
        self.status = status
        self.body = body


class ChatProtocolError(ChatError):
    """Endpoint answered with a malformed body."""

    code = "chat_protocol"
