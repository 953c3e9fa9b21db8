class AdapterError(Exception):
    """Base for everything this package raises on purpose."""


class EncoderUnavailable(AdapterError):
    """The requested encoder cannot be constructed (unknown id, missing
    optional dependency, or unloadable weights)."""


class UnsupportedAudio(AdapterError):
    """The audio file cannot be decoded into PCM-16 samples."""
