from cavityring import cli

cli(auto_envvar_prefix="CAVITYRING", prog_name="cavityring")
