from jetflow.main import main

main()
