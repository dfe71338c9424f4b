"""
Start the FastAPI backend for the Schmidt witness toolkit.

Keep-alive is raised because SIC fiducial searches for d = 7 or 8 can hold
a /api/py/frames or /api/py/certify request for several seconds on the
first call; later calls hit the frame cache.
"""

import uvicorn

from api.services.settings import get_settings

if __name__ == "__main__":
    uvicorn.run(
        "api.index:app",
        host="127.0.0.1",
        port=8000,
        reload=True,
        timeout_keep_alive=120,
        timeout_graceful_shutdown=30,
        log_level=get_settings().log_level.lower()
    )
