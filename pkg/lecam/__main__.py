from lecam.cli import main

main()
