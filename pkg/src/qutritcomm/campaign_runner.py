"""Concurrent Monte Carlo campaigns over many settings."""

import asyncio
import logging
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .analysis import SettingReport, report_setting
from .physical_model import NoiseConfig, SettingCounts, run_setting
from .protocol_engine import ProtocolSetting
from .qutrit_core import make_rng

logger = logging.getLogger(__name__)


@dataclass
class SettingResult:
    """Simulation result for one setting of a campaign.

    Attributes:
        index: Position of the setting in the campaign
        setting: The simulated setting
        seed: Stream seed used for this setting (master seed + index)
        counts: Detections per detector
        report: Statistics over the counts (None if there were no detections)
    """

    index: int
    setting: ProtocolSetting
    seed: int
    counts: SettingCounts
    report: Optional[SettingReport] = None


class CampaignRunner:
    """Runs run_setting for every setting of a campaign, a few at a time.

    Each setting gets its own stream seeded with master_seed + index, so the
    rows do not depend on completion order or on the concurrency limit.

    Args:
        noise: Noise parameters; noise.seed is the master seed
        concurrency: Maximum settings simulated at once (default: 3)
        progress: Print a progress line to stderr
    """

    def __init__(self, noise: NoiseConfig, concurrency: int = 3, progress: bool = True):
        self.noise = noise
        self.semaphore = asyncio.Semaphore(concurrency)
        self.progress = progress

    def seed_for(self, index: int) -> int:
        return int(self.noise.seed) + index

    async def run(self, settings: Sequence[ProtocolSetting]) -> List[SettingResult]:
        """Simulate every setting and return results in input order."""
        total = len(settings)
        tasks = [self._run_one(setting, i, total) for i, setting in enumerate(settings)]
        results = await asyncio.gather(*tasks)
        if self.progress and total:
            print("", file=sys.stderr)  # newline after progress line
        return list(results)

    async def _run_one(self, setting: ProtocolSetting, index: int, total: int) -> SettingResult:
        async with self.semaphore:
            if self.progress:
                print(
                    f"\rSimulating {index + 1}/{total}... ({setting.label})",
                    end="",
                    flush=True,
                    file=sys.stderr,
                )
            seed = self.seed_for(index)
            counts = await asyncio.to_thread(run_setting, setting, self.noise, make_rng(seed))
        report = None
        if counts.total > 0:
            report = report_setting(
                counts, setting.expected_outcome, setting.protocol, setting.label
            )
        else:
            logger.warning("Setting %s produced no detections", setting.label)
        return SettingResult(index=index, setting=setting, seed=seed, counts=counts, report=report)


def run_campaign(
    settings: Sequence[ProtocolSetting],
    noise: NoiseConfig,
    concurrency: int = 3,
    progress: bool = False,
) -> List[SettingResult]:
    """Synchronous wrapper around CampaignRunner.run."""

    async def _run():
        return await CampaignRunner(noise, concurrency=concurrency, progress=progress).run(settings)

    return asyncio.run(_run())
