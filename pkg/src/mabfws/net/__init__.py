from .crypto import derive_key, encrypt_private_part
from .delay import DelayModel, sample_delay
from .envelope import Envelope, FrameDecoder, FramingError, Kind, frame, unframe
from .sockets import SocketNetwork
from .transport import Endpoint, Network, SimNetwork, TransportClosed

__all__ = [
    "DelayModel",
    "Endpoint",
    "Envelope",
    "FrameDecoder",
    "FramingError",
    "Kind",
    "Network",
    "SimNetwork",
    "SocketNetwork",
    "TransportClosed",
    "derive_key",
    "encrypt_private_part",
    "frame",
    "sample_delay",
    "unframe",
]
