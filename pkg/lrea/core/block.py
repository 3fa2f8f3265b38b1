"""Block class represents the basic processing unit of an lrea scenario."""
import inspect
import logging


def not_overridden(method):
    method.is_not_overridden = True
    return method


class Block(object):
    """The smallest processing unit: it gets the Dataset of a scenario and may use or change it.

    Subclasses override `process_dataset` (whole-dataset work like training)
    or `process_example` (called for each example in order).
    """

    def __init__(self, **kwargs):
        if kwargs:
            raise TypeError(f"Extra parameters {kwargs}.\n"
                            f"Parameters of {self.block_name()} are:\n"
                            + '\n'.join(sorted(self.parameter_names())))

    @classmethod
    def parameter_names(cls):
        params = set()
        for klass in cls.mro()[:-1]:
            params.update(inspect.signature(klass.__init__).parameters.keys())
        return params - {'self', 'kwargs'}

    def block_name(self):
        module = ".".join(self.__module__.split(".")[:-1])
        if module.startswith('lrea.block.'):
            module = module[len('lrea.block.'):]
        return module + "." + self.__class__.__name__

    def process_start(self):
        """A hook method that is executed before processing any data"""
        pass

    def process_end(self):
        """A hook method that is executed after processing all data"""
        pass

    @not_overridden
    def process_example(self, _):
        """Process one Example"""
        pass

    def run(self, dataset):
        self.process_start()
        self.apply_on_dataset(dataset)
        self.process_end()

    def apply_on_dataset(self, dataset):
        self.before_process_dataset(dataset)
        self.process_dataset(dataset)
        self.after_process_dataset(dataset)

    def process_dataset(self, dataset):
        """Process a Dataset; the default calls process_example on every example."""
        if hasattr(self.process_example, 'is_not_overridden'):
            raise NotImplementedError("No processing activity defined in block " + self.block_name())
        for number, example in enumerate(dataset, 1):
            logging.debug('Block %s processing example #%d (%s)', self.block_name(), number, example.address())
            self.process_example(example)

    def before_process_dataset(self, dataset):
        """This method is called before each process_dataset."""
        pass

    def after_process_dataset(self, dataset):
        """This method is called after each process_dataset."""
        pass
