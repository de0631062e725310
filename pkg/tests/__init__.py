# spdc-fiber tests package
