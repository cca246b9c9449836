"""FastAPI service wrapping the experiment runners.

``schemas`` defines the pydantic request/response models, ``api`` the pure
request-to-response functions, and ``app`` the HTTP layer.  The CLI calls
``api`` directly by default and speaks to ``app`` over HTTP when pointed at
a remote server; both paths produce identical responses.
"""

from .api import (
    entry_to_request,
    run_campaign,
    run_caps,
    run_grassmann,
    run_point_experiment,
)
from .app import create_app
from .schemas import (
    BodyModel,
    CampaignModel,
    CapsRequest,
    ExperimentRequest,
    ExperimentResponse,
    GrassmannRequest,
)

__all__ = [
    "BodyModel",
    "CampaignModel",
    "CapsRequest",
    "ExperimentRequest",
    "ExperimentResponse",
    "GrassmannRequest",
    "create_app",
    "entry_to_request",
    "run_campaign",
    "run_caps",
    "run_grassmann",
    "run_point_experiment",
]
