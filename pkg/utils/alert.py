"""
Run Notification Utility Module.
Posts experiment start / finish / failure notices to a Slack-compatible webhook.
"""

import json
import logging
import os
from datetime import datetime

import requests
from dotenv import load_dotenv

logger = logging.getLogger(__name__)
load_dotenv()

SEVERITY_MAP = {
    "INFO": {"color": "#36a64f", "title": "Run Normal"},
    "WARNING": {"color": "#FFCC00", "title": "Run Warning"},
    "ERROR": {"color": "#FF0000", "title": "Run Error"},
    "CRITICAL": {"color": "#800000", "title": "Run Failure"},
}


def build_payload(message: str, level: str = "INFO") -> dict:
    """Builds the attachment payload for one notification."""
    style = SEVERITY_MAP.get(level.upper(), SEVERITY_MAP["INFO"])
    now = datetime.now()
    return {
        "attachments": [
            {
                "fallback": f"[{level}] {message}",
                "color": style["color"],
                "pretext": "*Maxfun Experiments*",
                "title": style["title"],
                "text": message,
                "fields": [
                    {"title": "Host", "value": os.uname().nodename if hasattr(os, "uname") else "unknown", "short": True},
                    {"title": "Timestamp", "value": now.strftime("%Y-%m-%d %H:%M:%S"), "short": True},
                ],
                "footer": "maxfun-cli",
                "ts": int(now.timestamp()),
            }
        ]
    }


def send_run_alert(message: str, level: str = "INFO") -> None:
    """
    Sends a run notification when ``MAXFUN_WEBHOOK_URL`` is configured.

    Delivery problems are logged and swallowed: a notification must never change
    the outcome of an experiment.

    Args:
        message (str): Notification body.
        level (str): INFO, WARNING, ERROR or CRITICAL.
    """
    webhook_url = os.getenv("MAXFUN_WEBHOOK_URL")
    if not webhook_url:
        logger.debug("[Alert] MAXFUN_WEBHOOK_URL is not set. Skipping notification.")
        return

    try:
        response = requests.post(
            webhook_url,
            data=json.dumps(build_payload(message, level)),
            headers={"Content-Type": "application/json"},
            timeout=5,
        )
        if response.status_code != 200:
            logger.error(f"[Alert] Webhook returned error: {response.status_code} - {response.text}")
        else:
            logger.debug(f"[Alert] Notification sent (Level: {level})")
    except requests.exceptions.RequestException as e:
        logger.error(f"[Alert] Failed to reach webhook: {e}")
