import contextvars
import dataclasses
import functools
import inspect
import math
import sys
from typing import Any, Callable, TypeVar, cast


@dataclasses.dataclass(frozen=True)
class Settings:
    arc_segments: int = 256
    min_angle_floor: float = math.radians(5.0)
    max_attempts: int = 200
    eps_geom: float = 1e-12
    min_quality_angle: float = 20.0  # degrees, handed to Triangle's q switch
    coarse_fraction: float = 0.1  # h_target = coarse_fraction * diameter
    refine_levels: int = 3
    k: int = 4
    eig_tol: float = 1e-8
    eig_seed: int = 20020101
    gap_tol_rel: float = 1e-6


_current = contextvars.ContextVar('eigratio_settings', default=Settings())


def get_settings():
    return _current.get()


FuncType = Callable[..., Any]
F = TypeVar('F', bound=FuncType)


class _DecoratorContextManager:
    """Allow a context manager to be used as a decorator"""

    def __call__(self, func: F) -> F:
        if inspect.isgeneratorfunction(func):
            return self._wrap_generator(func)

        @functools.wraps(func)
        def decorate_context(*args, **kwargs):
            with self.clone():
                return func(*args, **kwargs)

        return cast(F, decorate_context)

    def _wrap_generator(self, func):
        """Wrap each generator invocation with the context manager"""

        @functools.wraps(func)
        def generator_context(*args, **kwargs):
            gen = func(*args, **kwargs)
            # the overrides must be active whenever the generator body runs and
            # inactive whenever control is back with the caller
            try:
                with self.clone():
                    response = gen.send(None)

                while True:
                    try:
                        request = yield response

                    except GeneratorExit:
                        with self.clone():
                            gen.close()
                        raise

                    except BaseException:
                        with self.clone():
                            response = gen.throw(*sys.exc_info())

                    else:
                        with self.clone():
                            response = gen.send(request)

            except StopIteration as e:
                return e.value

        return generator_context

    def clone(self):
        raise NotImplementedError

    def __enter__(self) -> None:
        raise NotImplementedError

    def __exit__(self, exc_type: Any, exc_value: Any, traceback: Any) -> None:
        raise NotImplementedError


class override(_DecoratorContextManager):
    """
    Temporarily replace some defaults:

    with override(arc_segments=512):
        d = make_ellipse(2.0)

    @override(eig_tol=1e-10)
    def tight_solve(...): ...
    """

    def __init__(self, **changes):
        names = {f.name for f in dataclasses.fields(Settings)}
        unknown = set(changes) - names
        if unknown:
            raise TypeError(f'unknown setting(s): {", ".join(sorted(unknown))}')
        self.changes = changes
        self._tokens = []

    def clone(self):
        return override(**self.changes)

    def __enter__(self):
        self._tokens.append(_current.set(dataclasses.replace(_current.get(), **self.changes)))
        return _current.get()

    def __exit__(self, exc_type, exc_value, traceback):
        _current.reset(self._tokens.pop())
