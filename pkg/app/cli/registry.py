import argparse

COMMANDS = {}


class Error(Exception):
    pass


class UsageError(Error):
    pass


def command(command_name):

    def decorator(func):
        COMMANDS[command_name] = func
        return func

    return decorator


class ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting on invalid arguments."""

    def error(self, message):
        raise UsageError(f'{self.prog}: {message}')


def usage():
    lines = ['Usage: eanet <subcommand> [options]', '', 'Subcommands:']
    for name in sorted(COMMANDS):
        summary = (COMMANDS[name].__doc__ or '').strip().splitlines()
        lines.append(f'  {name:<14}{summary[0] if summary else ""}')
    return '\n'.join(lines) + '\n'
