import logging
from abc import ABC, abstractmethod

from sgtools.cli.config import RunConfig


class CliHandler(ABC):

    def __init__(self, args_list, config=None, threads=None,
                 log_level=logging.INFO):
        self._args_list = args_list
        self._args = self._parse_args()
        self._config = config or RunConfig()
        self._threads = threads
        self._log_level = log_level
        self._results = None

    def execute(self):
        logger = logging.getLogger(__name__)
        logger.setLevel(self._log_level)

        action_name = self._args.action.replace('-', '_')
        method_name = '_{}'.format(action_name)
        method = getattr(self, method_name)
        self._results = method()
        if self._results:
            print(self._results)
        return self._results

    @abstractmethod
    def _parse_args(self):
        """Returns parsed args from self._args_list"""
        pass
