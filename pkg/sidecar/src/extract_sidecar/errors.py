"""Exception taxonomy for the extraction sidecar."""


class SidecarError(Exception):
    """Base class for everything raised on purpose."""


class JobError(SidecarError):
    """Invalid job description or manifest contents."""


class BackendUnavailable(SidecarError):
    """An explicitly requested model backend cannot be constructed."""


class InpaintUnavailable(SidecarError):
    """Inpainting support is missing or failed for one image."""
