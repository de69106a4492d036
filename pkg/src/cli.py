import typer

from commands.run import run
from commands.bounds import bounds
from commands.cell import cell

app = typer.Typer(help="반응-확산 전선 연소율 실험 CLI")

app.command()(run)
app.command()(bounds)
app.command()(cell)

if __name__ == "__main__":
    app()
